// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: data generation, training, boundary-control
// reconstruction, bound calculators, ISTA unrolling and checkpoint
// evaluation. One JSON config per run; flags override config scalars.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ornet/bc.hpp"
#include "ornet/io.hpp"
#include "ornet/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ornet;

namespace {

struct GlobalOpts {
  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = int(std::thread::hardware_concurrency());
  std::string compare_net;
};

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) { ok = true; break; }
    if (!ok) throw IoError("unknown key '" + it.key() + "' in " + where);
  }
}

json load_config(const GlobalOpts& g) {
  json cfg = json::object();
  if (!g.config_path.empty()) {
    std::ifstream in(g.config_path);
    if (!in) throw IoError("cannot open config " + g.config_path);
    in >> cfg;
    if (!cfg.contains("version") || cfg["version"].get<int>() != 1)
      throw IoError("config must carry version = 1");
  }
  check_keys(cfg, {"version", "seed", "out", "prior", "grid", "basis", "datagen", "train",
                   "bc", "bounds", "unroll", "eval"},
             "config");
  return cfg;
}

std::uint64_t effective_seed(const GlobalOpts& g, const json& cfg) {
  if (g.seed_set) return g.seed;
  return cfg.value("seed", std::uint64_t(0));
}

wave1d::SimConfig sim_config(const json& cfg) {
  wave1d::SimConfig sim;
  sim.horizon_T = 4.0;
  sim.time_steps = 4096;
  if (cfg.contains("grid")) {
    const json& g = cfg["grid"];
    check_keys(g, {"T", "time_steps", "cfl", "margin", "c_cap"}, "grid");
    sim.horizon_T = g.value("T", sim.horizon_T);
    sim.time_steps = g.value("time_steps", sim.time_steps);
    sim.cfl = g.value("cfl", 0.9);
    sim.margin = g.value("margin", 0.5);
  }
  return sim;
}

double grid_c_cap(const json& cfg) {
  if (cfg.contains("grid")) return cfg["grid"].value("c_cap", 1.3);
  return 1.3;
}

wave1d::TimeBasis basis_from(const json& cfg, double horizon_T) {
  std::string kind = "pwc-graded";
  int n = 64, segments = 16, ratio = 8;
  if (cfg.contains("basis")) {
    const json& b = cfg["basis"];
    check_keys(b, {"kind", "n", "segments", "ratio"}, "basis");
    kind = b.value("kind", kind);
    n = b.value("n", n);
    segments = b.value("segments", segments);
    ratio = b.value("ratio", ratio);
  }
  if (kind == "pwc") return wave1d::TimeBasis::uniform(horizon_T, n);
  if (kind == "pwc-graded") return wave1d::TimeBasis::graded(horizon_T, segments, ratio);
  throw IoError("unknown basis kind " + kind);
}

wave1d::PriorSpec prior_from(const json& cfg, double horizon_T, double c_cap) {
  wave1d::PriorSpec p;
  p.c_max = c_cap;
  p.c_min = 2.0 - c_cap;
  p.support_lo = 0.25 * horizon_T;
  p.support_hi = 1.5 * horizon_T;
  p.smoothness = 500.0;
  if (cfg.contains("prior")) {
    const json& j = cfg["prior"];
    check_keys(j, {"c_min", "c_max", "amplitude", "smoothness", "support", "bumps"}, "prior");
    p.c_min = j.value("c_min", p.c_min);
    p.c_max = j.value("c_max", p.c_max);
    p.amplitude = j.value("amplitude", p.amplitude);
    p.smoothness = j.value("smoothness", p.smoothness);
    p.bumps = j.value("bumps", p.bumps);
    if (j.contains("support")) {
      p.support_lo = j["support"][0].get<double>();
      p.support_hi = j["support"][1].get<double>();
    }
  }
  return p;
}

// lambda assembly with optional column-parallel workers
Mat lambda_for_profile(const wave1d::WaveSpeedProfile& prof, const wave1d::TimeBasis& basis,
                       const wave1d::SimConfig& sim, int threads) {
  if (threads <= 1) return wave1d::lambda_op(prof, basis, sim);
  // column blocks are independent; results land in disjoint slices so the
  // assembly is deterministic regardless of scheduling
  const int n = basis.size();
  Mat lam = Mat::Zero(n, n);
  const Mat v = wave1d::basis_on_grid(basis, sim.time_steps);
  std::vector<int> eidx(n + 1);
  const double dt = basis.t_max() / sim.time_steps;
  for (int i = 0; i <= n; ++i) eidx[i] = int(std::llround(basis.edges()[i] / dt));
  auto worker = [&](int lo, int hi) {
    for (int j = lo; j < hi; ++j) {
      std::vector<double> h(sim.time_steps + 1);
      for (int k = 0; k <= sim.time_steps; ++k) h[k] = v(j, k);
      wave1d::BoundaryRun run = wave1d::solve_wave_boundary(prof, h, sim);
      for (int i = 0; i < n; ++i)
        lam(i, j) = (run.trace[eidx[i + 1]] - run.trace[eidx[i]]) / std::sqrt(basis.widths()[i]);
    }
  };
  std::vector<std::thread> pool;
  const int workers = std::min(threads, n);
  for (int w = 0; w < workers; ++w)
    pool.emplace_back(worker, n * w / workers, n * (w + 1) / workers);
  for (auto& t : pool) t.join();
  return lam;
}

Vec speed_targets(const wave1d::WaveSpeedProfile& prof, double horizon_T, int n) {
  const wave1d::TravelTime tt = wave1d::travel_time(prof);
  Vec target(n);
  for (int i = 0; i < n; ++i) {
    const double s = horizon_T * double(i + 1) / n;
    const double x = tt.chi(s);
    const double p = x / prof.dx();
    const std::size_t cell = std::min(std::size_t(p), prof.c.size() - 2);
    const double w = p - double(cell);
    target[i] = (1.0 - w) * prof.c[cell] + w * prof.c[cell + 1];
  }
  return target;
}

int cmd_datagen(const GlobalOpts& g) {
  const json cfg = load_config(g);
  const std::uint64_t seed = effective_seed(g, cfg);
  const wave1d::SimConfig sim = sim_config(cfg);
  const double c_cap = grid_c_cap(cfg);
  const wave1d::TimeBasis basis = basis_from(cfg, sim.horizon_T);
  const wave1d::PriorSpec prior = prior_from(cfg, sim.horizon_T, c_cap);

  int samples = 8;
  std::string target_kind = "speed_on_s_grid";
  if (cfg.contains("datagen")) {
    check_keys(cfg["datagen"], {"samples", "target"}, "datagen");
    samples = cfg["datagen"].value("samples", samples);
    target_kind = cfg["datagen"].value("target", target_kind);
  }
  if (target_kind != "speed_on_s_grid")
    throw IoError("unknown datagen target " + target_kind);

  const wave1d::SimGrid grid = wave1d::make_grid(sim, c_cap);
  training::TrainingSet set;
  set.seed = seed;
  set.prior_tag = "bumps";

  fs::create_directories(g.out_dir);
  for (int i = 0; i < samples; ++i) {
    wave1d::WaveSpeedProfile prof =
        prior.amplitude == 0.0
            ? wave1d::constant_profile(grid.x_max, grid.nodes, 1.0)
            : wave1d::sample_prior(seed + std::uint64_t(i), prior, grid.x_max, grid.nodes);
    Mat lam = lambda_for_profile(prof, basis, sim, g.threads);
    set.inputs.push_back(std::move(lam));
    set.targets.push_back(speed_targets(prof, sim.horizon_T, basis.size()));
    io::save_profile(fs::path(g.out_dir) / ("profile_" + std::to_string(i) + ".json"), prof);
  }
  io::save_training_set(g.out_dir, set);
  std::cout << "datagen: wrote " << samples << " samples to " << g.out_dir << "\n";
  return 0;
}

int cmd_train(const GlobalOpts& g) {
  const json cfg = load_config(g);
  const std::uint64_t seed = effective_seed(g, cfg);
  if (!cfg.contains("train")) throw IoError("config lacks a train block");
  const json& t = cfg["train"];
  check_keys(t, {"dataset", "alpha", "iters", "step", "depth", "l0", "r0_cap", "prox_every",
                 "holdout", "resume"},
             "train");
  const std::string dataset = t.at("dataset").get<std::string>();
  training::TrainingSet full = io::load_training_set(dataset);
  if (full.size() == 0) throw IoError("empty dataset");
  const int n = int(full.inputs[0].rows());

  const double holdout = t.value("holdout", 0.25);
  const std::size_t keep = std::max<std::size_t>(1, std::size_t(full.size() * (1.0 - holdout)));
  training::TrainingSet train_set, test_set;
  train_set.seed = full.seed;
  test_set.seed = full.seed;
  for (std::size_t i = 0; i < full.size(); ++i) {
    auto& dst = i < keep ? train_set : test_set;
    dst.inputs.push_back(full.inputs[i]);
    dst.targets.push_back(full.targets[i]);
  }

  training::TrainConfig tc;
  tc.alpha = t.value("alpha", 1e-2);
  tc.max_iters = t.value("iters", 500);
  tc.step_size = t.value("step", 1e-2);
  tc.r0_cap = t.value("r0_cap", -1.0);
  tc.l0 = t.value("l0", 1.0);
  tc.prox_every = t.value("prox_every", 1);
  tc.seed = seed;

  ornn::ParamSet init = [&] {
    if (t.contains("resume")) return io::load_paramset(t["resume"].get<std::string>());
    const int depth = t.value("depth", 2);
    ornn::NetworkSpec spec;
    spec.depth = depth;
    spec.width = n;
    spec.lag = 1;
    ornn::ParamSet ps(spec);
    Rng rng(seed ^ 0x7261696eULL);
    for (int l = 1; l <= depth; ++l)
      for (int i = 0; i < 2; ++i)
        for (int s = 1; s <= 4 * n; ++s) {
          Vec v = rng.normal_vec(n);
          v *= 0.25 / std::sqrt(double(n)) / std::max(1.0, v.norm());
          ps.set_vector({l, 1, i, s}, v);
        }
    return ps;
  }();

  training::TrainResult res = training::train(init, train_set, tc);

  fs::create_directories(g.out_dir);
  io::save_paramset(fs::path(g.out_dir) / "checkpoint.json", res.params);
  {
    std::ofstream hist(fs::path(g.out_dir) / "history.csv");
    hist << "iter,data_fit,R,N1,loss\n";
    for (const auto& row : res.history) {
      if (row.iter == 0) continue;  // seed state; rows correspond to iterations run
      hist << row.iter << "," << io::format_double(row.data_fit) << ","
           << io::format_double(row.regularizer) << "," << row.n1 << ","
           << io::format_double(row.loss) << "\n";
    }
  }
  json metrics;
  metrics["data_fit"] = res.history.back().data_fit;
  metrics["R"] = res.history.back().regularizer;
  metrics["N1"] = res.history.back().n1;
  metrics["iterations"] = res.history.back().iter;
  Vec h0 = Vec::Zero(n);
  h0[0] = 1.0;
  if (test_set.size() > 0)
    metrics["gap_estimate"] =
        training::generalization_gap_estimate(res.params, train_set, test_set, tc.alpha, h0);
  json manifest;
  manifest["config"] = cfg;
  manifest["seed"] = seed;
  manifest["history_csv"] = "history.csv";
  manifest["metrics"] = metrics;
  std::ofstream out(fs::path(g.out_dir) / "train_manifest.json");
  out << manifest.dump(2) << "\n";
  std::cout << "train: final data_fit " << io::format_double(res.history.back().data_fit)
            << " N1 " << res.history.back().n1 << "\n";
  return 0;
}

struct BcSetup {
  wave1d::SimConfig sim;
  wave1d::TimeBasis basis = wave1d::TimeBasis::uniform(1.0, 2);
  bc::BcOperators ops;
  double alpha = 1e-3;
  int iters = 200;
  int k_nodes = 16;
  double step = -1.0;
  double step_factor = -1.0;
};

BcSetup bc_setup(const json& cfg) {
  BcSetup b;
  b.sim = sim_config(cfg);
  b.basis = basis_from(cfg, b.sim.horizon_T);
  b.ops = bc::build_bc_operators(b.basis, b.sim.horizon_T);
  if (cfg.contains("bc")) {
    const json& j = cfg["bc"];
    check_keys(j, {"alpha", "iters", "k_nodes", "step", "step_factor", "lambda", "profile"},
               "bc");
    b.alpha = j.value("alpha", b.alpha);
    b.iters = j.value("iters", b.iters);
    b.k_nodes = j.value("k_nodes", b.k_nodes);
    b.step = j.value("step", -1.0);
    b.step_factor = j.value("step_factor", -1.0);
  }
  return b;
}

double resolve_step(const BcSetup& b, const Mat& lambda) {
  if (b.step > 0.0) return b.step;
  const Mat k = bc::connecting_operator(b.ops, lambda);
  const Mat p = b.ops.window_matrix(b.sim.horizon_T);
  const Mat q = p * k * p;
  const double norm = bc::power_norm(0.5 * (q + q.transpose()));
  const double factor = b.step_factor > 0.0 ? b.step_factor : 0.9;
  return factor / norm;
}

int cmd_reconstruct(const GlobalOpts& g) {
  const json cfg = load_config(g);
  const BcSetup b = bc_setup(cfg);
  if (!cfg.contains("bc") || !cfg["bc"].contains("lambda"))
    throw IoError("reconstruct needs bc.lambda");
  const std::string lambda_path = cfg["bc"]["lambda"].get<std::string>();
  if (!fs::exists(lambda_path)) throw IoError("lambda file not found: " + lambda_path);
  const Mat lambda = io::read_opmat(lambda_path);

  const double factor = b.step_factor > 0.0 ? b.step_factor : 0.9;
  bc::Reconstruction rec =
      bc::reconstruct_speed(lambda, b.ops, b.k_nodes, b.alpha, b.iters, b.step, factor);
  std::vector<double> v_full(rec.s_grid.size());
  v_full[0] = rec.speeds.front();
  for (std::size_t j = 1; j < rec.s_grid.size(); ++j) v_full[j] = rec.speeds[j - 1];
  bc::EuclideanProfile euc = bc::travel_to_euclidean(v_full, rec.s_grid);

  bool have_truth = false;
  wave1d::WaveSpeedProfile truth;
  if (cfg["bc"].contains("profile")) {
    truth = io::load_profile(cfg["bc"]["profile"].get<std::string>());
    have_truth = true;
  }
  wave1d::TravelTime tt;
  if (have_truth) tt = wave1d::travel_time(truth);

  Vec net_out;
  if (!g.compare_net.empty()) {
    ornn::ParamSet ckpt = io::load_paramset(g.compare_net);
    Vec h0 = Vec::Zero(ckpt.width());
    h0[0] = 1.0;
    net_out = ornn::forward_general(ckpt, lambda, h0).output;
  }

  fs::create_directories(g.out_dir);
  std::ofstream csv(fs::path(g.out_dir) / "report.csv");
  csv << "s_j,V_alpha,D_alpha,v_alpha,x_j,c_true_at_chi,rel_err";
  if (net_out.size() > 0) csv << ",net_v,net_rel_err";
  csv << "\n";
  double linf = 0.0, l2 = 0.0;
  for (int j = 1; j <= b.k_nodes; ++j) {
    const double s = rec.s_grid[j];
    const double v = rec.speeds[j - 1];
    double c_true = std::nan(""), rel = std::nan("");
    if (have_truth) {
      const double x = tt.chi(s);
      const double p = x / truth.dx();
      const std::size_t cell = std::min(std::size_t(p), truth.c.size() - 2);
      const double w = p - double(cell);
      c_true = (1.0 - w) * truth.c[cell] + w * truth.c[cell + 1];
      rel = std::abs(v - c_true) / c_true;
      linf = std::max(linf, rel);
      l2 += rel * rel;
    }
    csv << io::format_double(s) << "," << io::format_double(rec.volumes[j]) << ","
        << io::format_double(rec.slopes[j - 1]) << "," << io::format_double(v) << ","
        << io::format_double(euc.x[j]) << "," << io::format_double(c_true) << ","
        << io::format_double(rel);
    if (net_out.size() > 0) {
      const int n = int(net_out.size());
      const int idx =
          std::max(0, std::min(n - 1, int(std::llround(s / b.sim.horizon_T * n)) - 1));
      const double nv = net_out[idx];
      csv << "," << io::format_double(nv) << ","
          << io::format_double(have_truth ? std::abs(nv - c_true) / c_true : std::nan(""));
    }
    csv << "\n";
  }
  json summary;
  summary["alpha"] = b.alpha;
  summary["iters"] = b.iters;
  summary["step_factor"] = factor;
  summary["k_nodes"] = b.k_nodes;
  if (have_truth) {
    summary["rel_linf"] = linf;
    summary["rel_l2"] = std::sqrt(l2 / b.k_nodes);
  }
  std::ofstream sj(fs::path(g.out_dir) / "summary.json");
  sj << summary.dump(2) << "\n";
  std::cout << "reconstruct: wrote report to " << g.out_dir;
  if (have_truth) std::cout << " rel_linf " << io::format_double(linf);
  std::cout << "\n";
  return 0;
}

int cmd_bounds(const GlobalOpts& g) {
  const json cfg = load_config(g);
  if (!cfg.contains("bounds")) throw IoError("config lacks a bounds block");
  const json& j = cfg["bounds"];
  check_keys(j, {"flavor", "L", "n", "alpha", "f_inf", "l0", "r0", "eps0", "delta", "covering",
                 "calc46"},
             "bounds");
  const std::string flavor = j.value("flavor", "case-i");
  const int L = j.value("L", 1), n = j.value("n", 1);
  const double alpha = j.value("alpha", 1.0), f_inf = j.value("f_inf", 1.0);
  const double delta = j.value("delta", 0.1);

  training::BoundReport rep =
      flavor == "case-ii"
          ? training::generalization_constants_case_ii(L, n, alpha, f_inf, j.value("r0", 1.0),
                                                       j.value("eps0", 0.1))
          : training::generalization_constants_case_i(L, n, alpha, f_inf, j.value("l0", 1.0));

  json out;
  out["flavor"] = flavor;
  out["log10_C1"] = rep.log10_c1;
  out["log10_C2"] = rep.log10_c2;
  out["C1"] = rep.c1;
  out["C2"] = rep.c2;
  out["delta"] = delta;
  out["min_samples_for_0.05"] = rep.min_samples(delta);
  if (j.contains("covering")) {
    const json& c = j["covering"];
    check_keys(c, {"r0", "n0", "n", "m0", "rho", "L"}, "covering");
    training::CoveringBound cb =
        training::covering_size(c.at("r0").get<double>(), c.at("n0").get<long>(),
                                c.at("n").get<int>(), c.at("m0").get<double>(),
                                c.at("rho").get<double>(), c.at("L").get<int>());
    out["covering_log10_count"] = cb.log10_count;
    out["covering_perturbation_radius"] = cb.perturbation_radius;
  }
  if (j.contains("calc46")) {
    const json& c = j["calc46"];
    check_keys(c, {"delta", "C", "Cpp"}, "calc46");
    training::DiscretizationBudget db = training::discretization_budget(
        c.at("delta").get<double>(), c.at("C").get<double>(), c.at("Cpp").get<double>());
    out["calc46"] = {{"log10_eps", db.log10_eps}, {"depth", db.depth},
                     {"log10_width", db.log10_width}, {"log10_r0", db.log10_r0},
                     {"log10_n0", db.log10_n0}, {"log10_k", db.log10_k}};
  }
  fs::create_directories(g.out_dir);
  std::ofstream f(fs::path(g.out_dir) / "bounds.json");
  f << out.dump(2) << "\n";
  std::cout << "bounds: log10 C1 " << io::format_double(rep.log10_c1) << " C2 "
            << io::format_double(rep.c2) << "\n";
  return 0;
}

int cmd_unroll(const GlobalOpts& g) {
  const json cfg = load_config(g);
  const BcSetup b = bc_setup(cfg);
  if (!cfg.contains("unroll")) throw IoError("config lacks an unroll block");
  const json& j = cfg["unroll"];
  check_keys(j, {"s", "alpha", "iters", "step", "lambda"}, "unroll");
  const double s = j.value("s", b.sim.horizon_T);
  const double alpha = j.value("alpha", b.alpha);
  const int iters = j.value("iters", 20);
  double step = j.value("step", -1.0);
  if (step <= 0.0) {
    if (!j.contains("lambda"))
      throw IoError("unroll needs either an explicit step or a lambda file");
    step = resolve_step(b, io::read_opmat(j["lambda"].get<std::string>()));
  }
  bc::UnrollResult un = bc::unroll_to_ornn(b.ops, s, alpha, iters, step);
  fs::create_directories(g.out_dir);
  io::save_paramset(fs::path(g.out_dir) / "theta_s.json", un.params);
  json meta;
  meta["s"] = s;
  meta["alpha"] = alpha;
  meta["iterations"] = iters;
  meta["step"] = step;
  meta["depth"] = un.params.depth();
  std::ofstream f(fs::path(g.out_dir) / "unroll.json");
  f << meta.dump(2) << "\n";
  std::cout << "unroll: depth " << un.params.depth() << " step " << io::format_double(step)
            << "\n";
  return 0;
}

int cmd_eval(const GlobalOpts& g, const std::string& ckpt,
             const std::vector<std::string>& lambdas) {
  ornn::ParamSet params = io::load_paramset(ckpt);
  Vec h0 = Vec::Zero(params.width());
  h0[0] = 1.0;
  fs::create_directories(g.out_dir);
  int idx = 0;
  for (const auto& path : lambdas) {
    if (!fs::exists(path)) throw IoError("lambda file not found: " + path);
    const Mat lam = io::read_opmat(path);
    const Vec out = ornn::forward_general(params, lam, h0).output;
    Mat row(1, out.size());
    row.row(0) = out;
    io::write_opmat(fs::path(g.out_dir) / ("eval_" + std::to_string(idx) + ".opmat"), row);
    std::cout << "eval[" << idx << "]: |f(Lambda)| = " << io::format_double(out.norm()) << "\n";
    ++idx;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"operator recurrent networks and boundary-control reconstruction"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--config", g.config_path, "JSON config path")->check(CLI::ExistingFile);
  app.add_option("--out", g.out_dir, "output directory");
  auto* seed_opt = app.add_option("--seed", g.seed, "RNG seed override");
  app.add_option("--threads", g.threads, "worker threads for independent solves");
  app.add_option("--compare-net", g.compare_net, "checkpoint to evaluate alongside reconstruct");

  auto* datagen = app.add_subcommand("datagen", "sample priors and simulate data operators");
  auto* train = app.add_subcommand("train", "sparsity-regularized training");
  auto* reconstruct = app.add_subcommand("reconstruct", "boundary-control reconstruction");
  auto* bounds = app.add_subcommand("bounds", "generalization and discretization calculators");
  auto* unroll = app.add_subcommand("unroll", "emit the unrolled ISTA network");
  auto* eval = app.add_subcommand("eval", "forward a checkpoint on stored data operators");
  std::string eval_ckpt;
  std::vector<std::string> eval_lambdas;
  eval->add_option("checkpoint", eval_ckpt, "ParamSet manifest")->required();
  eval->add_option("lambdas", eval_lambdas, "OPMAT1 data operators")->required();

  CLI11_PARSE(app, argc, argv);
  g.seed_set = seed_opt->count() > 0;

  try {
    if (datagen->parsed()) return cmd_datagen(g);
    if (train->parsed()) return cmd_train(g);
    if (reconstruct->parsed()) return cmd_reconstruct(g);
    if (bounds->parsed()) return cmd_bounds(g);
    if (unroll->parsed()) return cmd_unroll(g);
    if (eval->parsed()) return cmd_eval(g, eval_ckpt, eval_lambdas);
  } catch (const IoError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::runtime_error& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  return 0;
}
