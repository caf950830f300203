// SPDX-License-Identifier: Apache-2.0
#include <cstdio>
#include <cstring>
#include <fstream>

#include "ornet/io.hpp"

#include <nlohmann/json.hpp>

namespace ornet::io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void put_u32(std::ofstream& out, std::uint32_t v) {
  unsigned char b[4] = {(unsigned char)(v & 0xff), (unsigned char)((v >> 8) & 0xff),
                        (unsigned char)((v >> 16) & 0xff), (unsigned char)((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::ifstream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 | std::uint32_t(b[2]) << 16 |
         std::uint32_t(b[3]) << 24;
}

json fixed_to_json(const ornn::FixedOp& op, const fs::path& blob_dir, const std::string& tag,
                   int* blob_counter) {
  using ornn::FixedKind;
  switch (op.kind) {
    case FixedKind::Zero: return "zero";
    case FixedKind::Identity: return "identity";
    case FixedKind::ScaledIdentity: return json{{"scaled_identity", op.scale}};
    case FixedKind::Dense: {
      const std::string name = tag + "_" + std::to_string((*blob_counter)++) + ".opmat";
      write_opmat(blob_dir / name, op.dense);
      return json{{"blob", name}};
    }
  }
  return "zero";
}

ornn::FixedOp fixed_from_json(const json& j, const fs::path& blob_dir) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "zero") return ornn::FixedOp::zero();
    if (s == "identity") return ornn::FixedOp::identity();
    throw IoError("unknown fixed operator name " + s);
  }
  if (j.contains("scaled_identity"))
    return ornn::FixedOp::scaled_identity(j["scaled_identity"].get<double>());
  if (j.contains("blob")) return ornn::FixedOp::from_dense(read_opmat(blob_dir / j["blob"].get<std::string>()));
  throw IoError("malformed fixed operator entry");
}

}  // namespace

void write_opmat(const fs::path& path, const Mat& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write("OPMAT1", 6);
  put_u32(out, std::uint32_t(m.rows()));
  put_u32(out, std::uint32_t(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const double v = m(r, c);
      static_assert(sizeof(double) == 8);
      // doubles are IEEE-754 little endian on every supported target
      out.write(reinterpret_cast<const char*>(&v), 8);
    }
  if (!out) throw IoError("short write to " + path.string());
}

Mat read_opmat(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[6];
  in.read(magic, 6);
  if (!in || std::memcmp(magic, "OPMAT1", 6) != 0)
    throw IoError(path.string() + " is not an OPMAT1 blob");
  const std::uint32_t rows = get_u32(in), cols = get_u32(in);
  Mat m(rows, cols);
  for (std::uint32_t r = 0; r < rows; ++r)
    for (std::uint32_t c = 0; c < cols; ++c) {
      double v;
      in.read(reinterpret_cast<char*>(&v), 8);
      m(r, c) = v;
    }
  if (!in) throw IoError("short read from " + path.string());
  return m;
}

void save_paramset(const fs::path& manifest_path, const ornn::ParamSet& params) {
  const fs::path dir = manifest_path.parent_path().empty() ? fs::path(".")
                                                           : manifest_path.parent_path();
  fs::create_directories(dir);
  const std::string stem = manifest_path.stem().string();

  json j;
  j["L"] = params.depth();
  j["K"] = params.lag();
  j["n"] = params.width();
  j["eta"] = params.leak();
  j["unconstrained"] = params.spec().unconstrained;
  if (params.spec().truncation_bound) j["truncation"] = *params.spec().truncation_bound;
  j["shared_layers"] = params.grouping();

  int blob_counter = 0;
  json fixed = json::object();
  for (int l = 1; l <= params.depth(); ++l)
    for (int k = 1; k <= params.lag(); ++k)
      for (int i = 0; i < 2; ++i) {
        const auto& fa = params.fixed_a(l, k, i);
        const auto& fb = params.fixed_b(l, k, i);
        if (fa.is_zero() && fb.is_zero()) continue;
        const std::string key =
            std::to_string(l) + "," + std::to_string(k) + "," + std::to_string(i);
        fixed[key] = {{"A", fixed_to_json(fa, dir, stem + "_fixed", &blob_counter)},
                      {"B", fixed_to_json(fb, dir, stem + "_fixed", &blob_counter)}};
      }
  j["fixed_ops"] = fixed;

  const auto indices = params.canonical_indices();
  Mat blob(indices.size(), params.width());
  for (std::size_t r = 0; r < indices.size(); ++r) blob.row(r) = params.vector(indices[r]);
  const std::string vec_name = stem + "_vectors.opmat";
  write_opmat(dir / vec_name, blob);
  j["vectors"] = vec_name;

  std::ofstream out(manifest_path);
  if (!out) throw IoError("cannot open " + manifest_path.string());
  out << j.dump(2) << "\n";
}

ornn::ParamSet load_paramset(const fs::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw IoError("cannot open " + manifest_path.string());
  json j;
  in >> j;
  const fs::path dir = manifest_path.parent_path().empty() ? fs::path(".")
                                                           : manifest_path.parent_path();

  ornn::NetworkSpec spec;
  spec.depth = j.at("L").get<int>();
  spec.lag = j.at("K").get<int>();
  spec.width = j.at("n").get<int>();
  spec.leak = j.at("eta").get<double>();
  spec.unconstrained = j.value("unconstrained", false);
  if (j.contains("truncation")) spec.truncation_bound = j["truncation"].get<double>();
  std::vector<int> grouping = j.at("shared_layers").get<std::vector<int>>();

  ornn::ParamSet params(spec, grouping);
  for (auto& [key, val] : j.at("fixed_ops").items()) {
    int l, k, i;
    if (std::sscanf(key.c_str(), "%d,%d,%d", &l, &k, &i) != 3)
      throw IoError("bad fixed operator key " + key);
    params.set_fixed_a(l, k, i, fixed_from_json(val.at("A"), dir));
    params.set_fixed_b(l, k, i, fixed_from_json(val.at("B"), dir));
  }

  const Mat blob = read_opmat(dir / j.at("vectors").get<std::string>());
  const auto indices = params.canonical_indices();
  if (std::size_t(blob.rows()) != indices.size() || blob.cols() != params.width())
    throw IoError("vectors blob shape does not match the manifest");
  for (std::size_t r = 0; r < indices.size(); ++r) {
    Vec v = blob.row(r);
    if (v.squaredNorm() > 0.0) params.set_vector(indices[r], std::move(v));
  }
  return params;
}

void save_profile(const fs::path& manifest_path, const wave1d::WaveSpeedProfile& profile) {
  const fs::path dir = manifest_path.parent_path().empty() ? fs::path(".")
                                                           : manifest_path.parent_path();
  fs::create_directories(dir);
  const std::string stem = manifest_path.stem().string();
  Mat row(1, profile.c.size());
  for (std::size_t i = 0; i < profile.c.size(); ++i) row(0, i) = profile.c[i];
  const std::string blob = stem + "_c.opmat";
  write_opmat(dir / blob, row);

  json j;
  j["x_max"] = profile.x.back();
  j["nodes"] = profile.x.size();
  j["c_values"] = blob;
  j["bounds"] = {profile.c_min, profile.c_max};
  j["I0"] = {profile.support_lo, profile.support_hi};
  j["seed"] = profile.seed;
  std::ofstream out(manifest_path);
  if (!out) throw IoError("cannot open " + manifest_path.string());
  out << j.dump(2) << "\n";
}

wave1d::WaveSpeedProfile load_profile(const fs::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw IoError("cannot open " + manifest_path.string());
  json j;
  in >> j;
  const fs::path dir = manifest_path.parent_path().empty() ? fs::path(".")
                                                           : manifest_path.parent_path();
  const Mat row = read_opmat(dir / j.at("c_values").get<std::string>());
  wave1d::WaveSpeedProfile p =
      wave1d::constant_profile(j.at("x_max").get<double>(), j.at("nodes").get<int>());
  for (std::size_t i = 0; i < p.c.size(); ++i) p.c[i] = row(0, i);
  p.c_min = j.at("bounds")[0].get<double>();
  p.c_max = j.at("bounds")[1].get<double>();
  p.support_lo = j.at("I0")[0].get<double>();
  p.support_hi = j.at("I0")[1].get<double>();
  p.seed = j.at("seed").get<std::uint64_t>();
  return p;
}

void save_training_set(const fs::path& dir, const training::TrainingSet& s) {
  fs::create_directories(dir);
  json j;
  j["count"] = s.size();
  j["seed"] = s.seed;
  j["prior"] = s.prior_tag;
  std::vector<std::string> lambda_files;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const std::string name = "lambda_" + std::to_string(i) + ".opmat";
    write_opmat(dir / name, s.inputs[i]);
    lambda_files.push_back(name);
  }
  j["lambdas"] = lambda_files;
  Mat targets(s.size(), s.targets.empty() ? 0 : s.targets[0].size());
  for (std::size_t i = 0; i < s.size(); ++i) targets.row(i) = s.targets[i];
  write_opmat(dir / "targets.opmat", targets);
  j["targets"] = "targets.opmat";
  std::ofstream out(dir / "manifest.json");
  if (!out) throw IoError("cannot open dataset manifest");
  out << j.dump(2) << "\n";
}

training::TrainingSet load_training_set(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw IoError("cannot open dataset manifest in " + dir.string());
  json j;
  in >> j;
  training::TrainingSet s;
  s.seed = j.at("seed").get<std::uint64_t>();
  s.prior_tag = j.value("prior", "");
  for (const auto& name : j.at("lambdas"))
    s.inputs.push_back(read_opmat(dir / name.get<std::string>()));
  const Mat targets = read_opmat(dir / j.at("targets").get<std::string>());
  for (Eigen::Index i = 0; i < targets.rows(); ++i) s.targets.push_back(targets.row(i));
  return s;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace ornet::io
