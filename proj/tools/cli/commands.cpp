#include "commands.hpp"

#include <cmath>
#include <cstdlib>
#include <ostream>

#include <CLI11.hpp>

#include "moc/feature_stats.hpp"
#include "moc/gradcheck.hpp"
#include "moc/harness.hpp"
#include "moc/io.hpp"
#include "moc/spd_geometry.hpp"
#include "moc/view_order.hpp"

namespace moc::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kSymmetryTolerance = 1e-9;

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

void require_finite(const json& j, const std::string& where) {
  if (j.is_number_float() && !std::isfinite(j.get<double>())) {
    throw Error(ErrorKind::InvalidInput, "non-finite value in report field " + where);
  }
  if (j.is_structured()) {
    for (const auto& [k, v] : j.items()) require_finite(v, where.empty() ? k : where + "." + k);
  }
}

SpdMatrix load_shifted_spd(const fs::path& path, double eps) {
  const Eigen::MatrixXd m = read_matrix_csv(path);
  if (m.rows() != m.cols()) {
    throw Error(ErrorKind::ShapeError, path.string() + " is " + std::to_string(m.rows()) + "x" +
                                           std::to_string(m.cols()) + ", expected a square matrix");
  }
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > kSymmetryTolerance * scale) {
    throw Error(ErrorKind::NotSymmetric, path.string() + " is not symmetric (max |a_ij - a_ji| = " +
                                             format_double(asym) + ")");
  }
  Eigen::MatrixXd shifted = m;
  shifted.diagonal().array() += eps;
  try {
    return SpdMatrix(shifted);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

std::optional<std::uint64_t> env_seed() {
  const char* s = std::getenv("MOC_SEED");
  if (s == nullptr || *s == '\0') return std::nullopt;
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(s, &end, 10);
  if (errno != 0 || end == s || *end != '\0' || *s == '-') {
    throw Error(ErrorKind::UsageError, std::string("MOC_SEED is not an unsigned integer: ") + s);
  }
  return v;
}

}  // namespace

json Report::to_json() const {
  return {{"command", command}, {"status", status}, {"inputs", inputs}, {"outputs", outputs}};
}

json error_json(const std::string& command, const Error& e) {
  json j = {{"command", command},
            {"status", "error"},
            {"error_kind", std::string(to_string(e.kind()))},
            {"message", e.what()}};
  if (const auto* pe = dynamic_cast<const ParseError*>(&e)) j["line"] = pe->line();
  if (const auto* de = dynamic_cast<const DivergedError*>(&e)) j["iteration"] = de->iteration();
  return j;
}

Report cmd_svo(const fs::path& embeddings, double delta) {
  const ViewEmbeddingSequence vs = read_embeddings_csv(embeddings);
  const Eigen::VectorXd sims = similarities(vs);
  const SvoResult r = svo_loss(sims, delta);
  Report rep{.command = "svo"};
  rep.inputs = {{"embeddings", embeddings.string()}, {"margin", delta}};
  rep.outputs = {{"views", vs.size()},
                 {"embedding_dim", vs.embedding_dim()},
                 {"azimuths", vs.azimuths()},
                 {"sims", r.sims},
                 {"per_term", r.per_term},
                 {"loss", r.loss},
                 {"min_gap", min_adjacent_gap(sims)}};
  if (vs.size() < 2) rep.outputs.erase("min_gap");
  return rep;
}

Report cmd_spd(const fs::path& current, const fs::path& target, double eps) {
  if (!(eps >= 0.0) || !std::isfinite(eps)) {
    throw Error(ErrorKind::UsageError, "--eps must be a finite non-negative number");
  }
  const SpdMatrix a = load_shifted_spd(current, eps);
  const SpdMatrix b = load_shifted_spd(target, eps);
  Report rep{.command = "spd"};
  rep.inputs = {{"current", current.string()}, {"target", target.string()}, {"eps", eps}};
  // The +eps I shift is already applied, so the library call uses eps = 0.
  rep.outputs = {{"dim", a.dim()}, {"lem_distance_sq", lem_distance_sq(a, b, 0.0)}};
  return rep;
}

Report cmd_descriptor(const fs::path& stack_dir, int patch, double eps,
                      const std::optional<fs::path>& out) {
  const FeatureMapStack stack = read_feature_stack(stack_dir);
  const ExtendedDescriptor desc = build_descriptor(stack, LuminanceWeights::equal(), patch, eps);
  if (out) write_matrix_csv(*out, desc.c.matrix());
  Report rep{.command = "descriptor"};
  rep.inputs = {{"stack", stack_dir.string()}, {"patch", patch}, {"eps", eps}};
  if (out) rep.inputs["out"] = out->string();
  rep.outputs = {{"dim", desc.c.dim()},
                 {"views", stack.size()},
                 {"det_c", desc.c.matrix().determinant()},
                 {"det_sigma_reg", desc.regularized_cov().determinant()},
                 {"min_eigenvalue", desc.c.min_eigenvalue()},
                 {"descriptor", matrix_json(desc.c.matrix())}};
  return rep;
}

Report cmd_gradcheck(const std::string& target, std::uint64_t seed, bool satisfied) {
  GradCheckResult r;
  if (target == "spd") {
    r = check_spd_gradient(seed);
  } else if (target == "svo") {
    r = satisfied ? check_svo_satisfied(seed) : check_svo_gradient(seed);
  } else if (target == "harness") {
    r = check_harness_gradient(seed);
  } else {
    throw Error(ErrorKind::UsageError, "unknown gradcheck target '" + target + "' (spd|svo|harness)");
  }
  Report rep{.command = "gradcheck"};
  rep.inputs = {{"target", target}, {"seed", seed}, {"satisfied", satisfied}};
  rep.outputs = {{"check", r.target},
                 {"instances", r.instances},
                 {"fd_step", kFdStep},
                 {"max_rel_err", r.max_rel_err},
                 {"max_abs_grad", r.max_abs_grad},
                 {"tolerance", r.tolerance},
                 {"pass", r.pass}};
  rep.status = r.pass ? "ok" : "fail";
  return rep;
}

Report cmd_optimize(const fs::path& config, std::optional<std::uint64_t> seed, const fs::path& out,
                    double tol_spd) {
  HarnessConfig cfg = read_harness_config(config);
  if (seed) cfg.seed = *seed;
  const OptimizationTrace trace = run_optimization(cfg);
  write_trace_csv(out, trace);
  const ConvergenceReport conv = check_convergence(trace, tol_spd, true);
  const TraceRecord& first = trace.records.front();
  const TraceRecord& last = trace.records.back();
  Report rep{.command = "optimize"};
  rep.inputs = {{"config", config.string()}, {"seed", cfg.seed}, {"out", out.string()}, {"tol_spd", tol_spd}};
  rep.outputs = {{"iterations", last.iter},
                 {"initial_total", first.total},
                 {"final_total", last.total},
                 {"initial_r_svo", first.r_svo},
                 {"final_r_svo", last.r_svo},
                 {"final_r_spd", last.r_spd},
                 {"final_min_gap", last.min_gap},
                 {"initial_lem_dist", first.lem_dist},
                 {"final_lem_dist", last.lem_dist},
                 {"spd_converged", conv.spd_converged},
                 {"svo_satisfied", conv.svo_satisfied},
                 {"total_decreased", conv.total_decreased}};
  return rep;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Consistency regularizers for multi-view optimization: view-order hinge loss, "
               "Log-Euclidean descriptor distance, gradient checks and a synthetic harness."};
  app.require_subcommand(1);

  double margin = kDefaultMargin;
  double eps = kDefaultEps;
  int patch = kDefaultPatch;
  std::string embeddings, current, target, stack_dir, descriptor_out, gc_target, config, trace_out;
  std::uint64_t seed = 1;
  bool satisfied = false;
  double tol_spd = 1e-3;

  auto* svo = app.add_subcommand("svo", "View-order hinge loss of an embedding CSV");
  svo->add_option("embeddings", embeddings, "Embedding CSV (azimuth_deg,e_0,...)")->required();
  svo->add_option("--margin", margin, "Hinge margin delta")->capture_default_str();

  auto* spd = app.add_subcommand("spd", "Squared Log-Euclidean distance of two matrix CSVs");
  spd->add_option("current", current, "Current SPD matrix CSV")->required();
  spd->add_option("target", target, "Target SPD matrix CSV")->required();
  spd->add_option("--eps", eps, "Tikhonov shift added to both matrices")->capture_default_str();

  auto* desc = app.add_subcommand("descriptor", "Extended SPD descriptor of a feature-stack directory");
  desc->add_option("stack", stack_dir, "Directory with stack.json and view_<azimuth>.csv")->required();
  desc->add_option("--patch", patch, "Patch side d")->capture_default_str();
  desc->add_option("--eps", eps, "Covariance regularization")->capture_default_str();
  desc->add_option("--out", descriptor_out, "Write the descriptor matrix CSV here");

  auto* gc = app.add_subcommand("gradcheck", "Compare analytic gradients against central differences");
  gc->add_option("target", gc_target, "spd | svo | harness")->required();
  gc->add_option("--seed", seed, "Seed (MOC_SEED overrides)")->capture_default_str();
  gc->add_flag("--satisfied", satisfied, "svo only: check a configuration that satisfies the ordering");

  auto* opt = app.add_subcommand("optimize", "Run the synthetic harness and write the trace CSV");
  opt->add_option("config", config, "Harness config JSON")->required();
  auto* seed_opt = opt->add_option("--seed", seed, "Seed (MOC_SEED overrides; default from config)");
  opt->add_option("--out", trace_out, "Trace CSV path")->required();
  opt->add_option("--tol-spd", tol_spd, "LEM distance regarded as converged")->capture_default_str();

  std::string command = "moc";
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << error_json(command, Error(ErrorKind::UsageError, e.what())).dump(2) << '\n';
    return 2;
  }

  try {
    std::optional<std::uint64_t> chosen_seed;
    if (gc->parsed() || seed_opt->count() > 0) chosen_seed = seed;
    if (const auto env = env_seed()) chosen_seed = env;

    Report rep;
    if (svo->parsed()) {
      command = "svo";
      rep = cmd_svo(embeddings, margin);
    } else if (spd->parsed()) {
      command = "spd";
      rep = cmd_spd(current, target, eps);
    } else if (desc->parsed()) {
      command = "descriptor";
      rep = cmd_descriptor(stack_dir, patch, eps,
                           descriptor_out.empty() ? std::nullopt : std::optional<fs::path>(descriptor_out));
    } else if (gc->parsed()) {
      command = "gradcheck";
      rep = cmd_gradcheck(gc_target, *chosen_seed, satisfied);
    } else {
      command = "optimize";
      rep = cmd_optimize(config, chosen_seed, trace_out, tol_spd);
    }
    const json j = rep.to_json();
    require_finite(j, "");
    out << j.dump(2) << '\n';
    return rep.ok() ? 0 : 1;
  } catch (const Error& e) {
    err << error_json(command, e).dump(2) << '\n';
    return e.kind() == ErrorKind::UsageError ? 2 : 1;
  } catch (const std::exception& e) {
    err << error_json(command, Error(ErrorKind::IoError, e.what())).dump(2) << '\n';
    return 1;
  }
}

}  // namespace moc::cli
