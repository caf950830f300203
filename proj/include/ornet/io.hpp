// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ornet/ornn.hpp"
#include "ornet/training.hpp"
#include "ornet/wave1d.hpp"

namespace ornet::io {

// OPMAT1 blob: 6-byte magic "OPMAT1", u32 LE rows, u32 LE cols, then
// rows*cols f64 LE row-major
void write_opmat(const std::filesystem::path& path, const Mat& m);
Mat read_opmat(const std::filesystem::path& path);

// ParamSet manifest: JSON {L, K, n, eta, shared_layers, fixed_ops, vectors}
// with the vectors blob holding (#P) x n rows in canonical P order
void save_paramset(const std::filesystem::path& manifest_path, const ornn::ParamSet& params);
ornn::ParamSet load_paramset(const std::filesystem::path& manifest_path);

// wave speed profile: JSON metadata plus a 1 x N OPMAT1 blob of c values
void save_profile(const std::filesystem::path& manifest_path,
                  const wave1d::WaveSpeedProfile& profile);
wave1d::WaveSpeedProfile load_profile(const std::filesystem::path& manifest_path);

// dataset directory: manifest.json + per-sample lambda blobs + targets blob
void save_training_set(const std::filesystem::path& dir, const training::TrainingSet& s);
training::TrainingSet load_training_set(const std::filesystem::path& dir);

// round-trip-safe float formatting (17 significant digits)
std::string format_double(double v);

}  // namespace ornet::io
