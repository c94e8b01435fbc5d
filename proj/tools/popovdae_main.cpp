#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "popovdae/constants.hpp"
#include "popovdae/decomposition.hpp"
#include "popovdae/errors.hpp"
#include "popovdae/io.hpp"
#include "popovdae/mild.hpp"
#include "popovdae/models.hpp"
#include "popovdae/pencil.hpp"
#include "popovdae/popov.hpp"
#include "popovdae/stability.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace popovdae;

namespace {

// Exit codes: 0 ok, 2 pencil rejected (index/regularity), 3 input error,
// 4 not coercive, 5 not exponentially stable, 1 anything else.
int exit_code_for(const Error& e) {
  if (dynamic_cast<const IndexTooHigh*>(&e)) return 2;
  if (dynamic_cast<const NoResolventPoint*>(&e)) return 2;
  if (dynamic_cast<const NotCoercive*>(&e)) return 4;
  if (dynamic_cast<const NotExponentiallyStable*>(&e)) return 5;
  if (dynamic_cast<const InvalidInput*>(&e)) return 3;
  if (dynamic_cast<const InvalidParams*>(&e)) return 3;
  if (dynamic_cast<const DimensionMismatch*>(&e)) return 3;
  if (dynamic_cast<const GridMismatch*>(&e)) return 3;
  if (dynamic_cast<const UnknownFixture*>(&e)) return 3;
  if (dynamic_cast<const SingularAtLambda*>(&e)) return 3;
  return 1;
}

void dump_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInput("cannot open '" + path.string() + "' for writing");
  out << j.dump(2) << '\n';
}

json matrix_to_json(const Matrix& M) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

// JSON has no inf/nan literals; report those as null.
json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(); }

Vector parse_x0(const std::string& s, int n) {
  if (s.empty() || s == "zero") return Vector::Zero(n);
  std::vector<double> vals;
  std::stringstream ss(s);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t used = 0;
      vals.push_back(std::stod(cell, &used));
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw InvalidInput("--x0 must be 'zero' or a comma-separated number list");
    }
  }
  if (static_cast<int>(vals.size()) != n)
    throw DimensionMismatch("--x0 has " + std::to_string(vals.size()) +
                            " entries but the system has n=" + std::to_string(n));
  Vector x0(n);
  for (int i = 0; i < n; ++i) x0(i) = vals[static_cast<std::size_t>(i)];
  return x0;
}

void parse_interval(const std::string& s, double& lo, double& hi, const char* flag) {
  const auto comma = s.find(',');
  if (comma == std::string::npos)
    throw InvalidInput(std::string(flag) + " expects 'a,b'");
  try {
    std::size_t used = 0;
    const std::string a = s.substr(0, comma), b = s.substr(comma + 1);
    lo = std::stod(a, &used);
    if (used != a.size()) throw std::invalid_argument(a);
    hi = std::stod(b, &used);
    if (used != b.size()) throw std::invalid_argument(b);
  } catch (const std::exception&) {
    throw InvalidInput(std::string(flag) + " expects 'a,b' with numeric bounds");
  }
}

json tolerance_block() {
  return json{{"eps_regularity", tol::eps_reg},
              {"eps_rank", tol::eps_rank},
              {"eps_stability", tol::eps_stab},
              {"eps_coercivity", tol::eps_coer},
              {"eps_psd", tol::eps_psd}};
}

int run_analyze(const std::string& system_path, std::uint32_t seed, const fs::path& out) {
  const DescriptorSystem sys = io::read_system_json(system_path);
  json j;
  j["n"] = sys.n();
  j["tolerances"] = tolerance_block();

  const RegularityReport rr = regularity_report(sys.E, sys.A, seed);
  json probes = json::array();
  for (const ProbeSample& pr : rr.probes)
    probes.push_back(json{{"lambda_re", pr.lambda.real()},
                          {"lambda_im", pr.lambda.imag()},
                          {"min_singular_value", pr.min_singular_value},
                          {"invertible", pr.invertible}});
  j["regularity"] = json{{"regular", rr.regular}, {"probes", std::move(probes)}};
  if (rr.regular) j["regularity"]["lambda0"] = rr.lambda0;

  if (!rr.regular) {
    j["error"] = "pencil is not regular at any probe point";
    dump_json(out / "analysis.json", j);
    return 2;
  }

  const Pencil p(sys.E, sys.A);
  const IndexTestResult idx = index_at_most_one(p);
  j["index"] = json{{"at_most_one", idx.at_most_one},
                    {"rank", idx.rank},
                    {"rank_square", idx.rank_square},
                    {"lambda0", idx.lambda0}};
  if (!idx.at_most_one) {
    j["error"] = "pencil index exceeds one";
    dump_json(out / "analysis.json", j);
    return 2;
  }

  const SpectralDecomposition d = spectral_decomposition(p);
  Eigen::JacobiSVD<Matrix> psvd(d.P);
  j["decomposition"] = json{{"r", d.r},
                            {"shift", d.shift},
                            {"lambda_ref", d.lambda_ref},
                            {"projector_norm", psvd.singularValues().size() > 0
                                                   ? psvd.singularValues()(0)
                                                   : 0.0}};

  const StabilityReport st = stability_verdict(d, p);
  json stj;
  stj["spectral_abscissa"] = finite_or_null(st.spectral_abscissa);
  stj["exponentially_stable"] = st.verdict;
  stj["marginal"] = st.marginal;
  if (st.lyapunov_pd) stj["lyapunov_pd"] = *st.lyapunov_pd;
  if (st.pseudo_lyapunov_pd) stj["pseudo_lyapunov_pd"] = *st.pseudo_lyapunov_pd;
  stj["l2_converged"] = st.l2_converged;
  stj["hinf_bound"] = finite_or_null(st.hinf);
  stj["dissipative"] = st.dissipative;
  stj["omega_witness"] = st.omega_witness;
  j["stability"] = std::move(stj);

  dump_json(out / "analysis.json", j);
  return 0;
}

int run_simulate(const std::string& system_path, const std::string& x0_str, double tf,
                 int steps, const std::string& input_path, bool raw_f, const fs::path& out) {
  const DescriptorSystem sys = io::read_system_json(system_path);
  const TimeGrid grid(tf, steps);
  const Pencil p(sys.E, sys.A);
  const SpectralDecomposition d = spectral_decomposition(p);

  Signal f = Signal::zero(grid, sys.n());
  if (!input_path.empty()) {
    const Signal in = io::read_signal_csv(input_path, grid);
    if (raw_f) {
      if (in.dim() != sys.n())
        throw DimensionMismatch("--raw-f input must have n=" + std::to_string(sys.n()) +
                                " value columns, found " + std::to_string(in.dim()));
      f = in;
    } else {
      if (in.dim() != sys.n_u())
        throw DimensionMismatch("input must have n_u=" + std::to_string(sys.n_u()) +
                                " value columns, found " + std::to_string(in.dim()));
      f.values = sys.B * in.values;
    }
  }

  const Vector x0 = parse_x0(x0_str, sys.n());
  const MildSolution ms = mild_solution(d, p, x0, f);
  const double residual = mild_residual(p, ms.x, f, x0);

  io::write_trajectory_csv((out / "trajectory.csv").string(), ms.x, sys.labels);
  dump_json(out / "mild_residual.json", json{{"residual", residual},
                                             {"consistency_gap", ms.consistency_gap},
                                             {"t_f", grid.t_f},
                                             {"steps", grid.m}});
  return 0;
}

int run_lqr(const std::string& system_path, const std::string& weights_path,
            const std::string& x0_str, bool infinite, double tail_tol, const fs::path& out) {
  const DescriptorSystem sys = io::read_system_json(system_path);
  const WeightSchedule w = io::read_weights_json(weights_path);
  const Pencil p(sys.E, sys.A);
  const SpectralDecomposition d = spectral_decomposition(p);
  const Vector x0 = parse_x0(x0_str, sys.n());

  LqrSolution sol;
  if (infinite) {
    for (int k = 1; k < w.grid.m; ++k) {
      const std::size_t ks = static_cast<std::size_t>(k);
      if ((w.Q[ks] - w.Q[0]).norm() != 0.0 || (w.N[ks] - w.N[0]).norm() != 0.0 ||
          (w.R[ks] - w.R[0]).norm() != 0.0)
        throw InvalidInput("--infinite requires constant weights");
    }
    sol = solve_infinite_horizon(d, sys, w.Q[0], w.N[0], w.R[0], x0, tail_tol, w.grid.m);
  } else {
    sol = solve_finite_horizon(d, sys, w, x0);
  }

  io::write_signal_csv((out / "u_opt.csv").string(), sol.u_opt, "u");
  io::write_signal_csv((out / "y_opt.csv").string(), sol.y_opt, "y");
  io::write_trajectory_csv((out / "x_opt.csv").string(), sol.x_opt, sys.labels);

  json j;
  j["cost"] = sol.cost;
  j["coercivity_margin"] = sol.coercivity_margin;
  j["consistency_gap"] = sol.consistency_gap;
  j["horizon"] = sol.horizon;
  if (infinite) j["tail_bound"] = sol.tail_bound;
  j["riccati_P"] = matrix_to_json(sol.riccati_P);
  dump_json(out / "solution.json", j);
  return 0;
}

int run_heat(int N, double L, double alpha, double k, const std::string& iu_str,
             const std::string& iy_str, const fs::path& out) {
  HeatParams hp;
  hp.N = N;
  hp.L = L;
  hp.alpha = alpha;
  hp.k = k;
  parse_interval(iu_str, hp.iu_lo, hp.iu_hi, "--iu");
  parse_interval(iy_str, hp.iy_lo, hp.iy_hi, "--iy");

  const DescriptorSystem sys = build_heat_dae(hp);
  io::write_system_json((out / "heat_system.json").string(), sys);

  json residuals;
  for (const double lam : {0.0, 1.0, 10.0})
    residuals[io::format_double(lam)] = verify_heat_resolvent(hp, lam);
  dump_json(out / "heat_checks.json",
            json{{"resolvent_residuals", std::move(residuals)},
                 {"spectral_abscissa", heat_spectral_abscissa(hp)},
                 {"N", hp.N},
                 {"h", hp.L / (hp.N + 1)}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LQ-optimal control for linear descriptor (DAE) systems"};
  app.require_subcommand(1);

  std::string system_path, weights_path, input_path;
  std::string x0_str = "zero", out_dir = ".";
  std::string iu_str = "0,1", iy_str = "0,1";
  double tf = 1.0, tail_tol = 1e-6, L = 1.0, alpha = 1.0, conductivity = 1.0;
  int steps = 100, N = 10;
  std::uint32_t seed = 0x5eed;
  bool raw_f = false, infinite = false;

  CLI::App* analyze =
      app.add_subcommand("analyze", "regularity, index, splitting and stability report");
  analyze->add_option("--system", system_path, "system JSON file")->required();
  analyze->add_option("--seed", seed, "seed for the randomized probe points");
  analyze->add_option("-o,--out", out_dir, "output directory");

  CLI::App* simulate =
      app.add_subcommand("simulate", "mild solution of d/dt E x = A x + f");
  simulate->add_option("--system", system_path, "system JSON file")->required();
  simulate->add_option("--x0", x0_str, "initial state: 'zero' or comma-separated values");
  simulate->add_option("--tf", tf, "final time");
  simulate->add_option("--steps", steps, "number of uniform steps");
  simulate->add_option("--input", input_path, "per-interval signal CSV (t,v_1,...)");
  simulate->add_flag("--raw-f", raw_f,
                     "treat the input columns as the inhomogeneity f instead of u");
  simulate->add_option("-o,--out", out_dir, "output directory");

  CLI::App* lqr = app.add_subcommand("lqr", "finite/infinite-horizon LQ-optimal control");
  lqr->add_option("--system", system_path, "system JSON file")->required();
  lqr->add_option("--weights", weights_path, "weights JSON file")->required();
  lqr->add_option("--x0", x0_str, "initial state: 'zero' or comma-separated values");
  lqr->add_flag("--infinite", infinite, "infinite horizon via certified truncation");
  lqr->add_option("--tail-tol", tail_tol, "infinite-horizon tail bound target");
  lqr->add_option("-o,--out", out_dir, "output directory");

  CLI::App* heat = app.add_subcommand("heat", "build the heat-diffusion DAE benchmark");
  heat->add_option("--N", N, "interior grid points (>= 2)");
  heat->add_option("--L", L, "rod length");
  heat->add_option("--alpha", alpha, "diffusivity");
  heat->add_option("--k", conductivity, "conductivity");
  heat->add_option("--iu", iu_str, "actuation interval 'a,b'");
  heat->add_option("--iy", iy_str, "observation interval 'a,b'");
  heat->add_option("-o,--out", out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 3;
  }

  try {
    const fs::path out(out_dir);
    if (!out_dir.empty()) fs::create_directories(out);
    if (app.got_subcommand(analyze)) return run_analyze(system_path, seed, out);
    if (app.got_subcommand(simulate))
      return run_simulate(system_path, x0_str, tf, steps, input_path, raw_f, out);
    if (app.got_subcommand(lqr))
      return run_lqr(system_path, weights_path, x0_str, infinite, tail_tol, out);
    if (app.got_subcommand(heat))
      return run_heat(N, L, alpha, conductivity, iu_str, iy_str, out);
    std::cerr << "error: no subcommand\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
