// Experiment driver for the metric-graph GFF percolation laboratory.

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <filesystem>

#include "gfflab/errors.hpp"
#include "gfflab/estimators.hpp"
#include "gfflab/iic.hpp"
#include "gfflab/loopsoup.hpp"
#include "gfflab/manifest.hpp"
#include "gfflab/parallel.hpp"
#include "gfflab/selftest.hpp"

namespace fs = std::filesystem;
using namespace gfflab;
using lattice::Point;

namespace {

constexpr const char* kVersion = "0.1.0";

struct CommonOpts {
  int d = 3;
  std::uint64_t seed = 1;
  std::uint64_t reps = 10000;
  int workers = 1;
  std::string out = "out";
  bool allow_critical_dim = false;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--d", o.d, "lattice dimension (>= 3, d = 6 refused)");
  cmd->add_option("--seed", o.seed, "RNG seed");
  cmd->add_option("--reps", o.reps, "Monte Carlo replicates");
  cmd->add_option("--workers", o.workers, "worker threads");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_flag("--allow-critical-dim", o.allow_critical_dim,
                "run d = 6 anyway (exploratory; no quantitative claims)");
}

void validate_dim(const CommonOpts& o) {
  if (o.d < 3) {
    throw CLI::ValidationError("--d", "dimension must be >= 3 (the walk is "
                                      "recurrent below three dimensions)");
  }
  if (o.d == 6 && !o.allow_critical_dim) {
    throw CLI::ValidationError(
        "--d", "d = 6 is the critical dimension and is excluded from "
               "quantitative runs; pass --allow-critical-dim to explore");
  }
  if (o.d == 6) {
    std::fprintf(stderr,
                 "*** WARNING: d = 6 is the critical dimension; exponent "
                 "laws change branch here and no acceptance claims apply.\n");
  }
}

struct RunContext {
  CommonOpts common;
  io::RunManifest manifest;
  std::vector<std::string> files;
  std::chrono::steady_clock::time_point t0;

  explicit RunContext(const CommonOpts& o, const std::string& name) {
    common = o;
    validate_dim(o);
    fs::create_directories(o.out);
    manifest.config["experiment"] = name;
    manifest.config["d"] = o.d;
    manifest.config["seed"] = o.seed;
    manifest.config["reps"] = o.reps;
    manifest.config["workers"] = o.workers;
    manifest.software_version = kVersion;
    manifest.started_utc = io::utc_now();
    t0 = std::chrono::steady_clock::now();
  }

  std::string path(const std::string& file) const {
    return (fs::path(common.out) / file).string();
  }

  void finish() {
    manifest.finished_utc = io::utc_now();
    manifest.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    manifest.files = files;
    manifest.write(path("manifest.json"));
  }
};

std::vector<std::string> fit_columns() {
  return {"slope", "slope_stderr", "intercept", "r_squared", "points_used"};
}

void fit_fields(io::CsvWriter& csv, const stats::SlopeFit& fit) {
  csv.field(fit.slope);
  csv.field(fit.slope_stderr);
  csv.field(fit.intercept);
  csv.field(fit.r_squared);
  csv.field(fit.points_used);
}

void blank_fit_fields(io::CsvWriter& csv) {
  for (int i = 0; i < 5; ++i) csv.field(std::string{});
}

void blank_estimate_fields(io::CsvWriter& csv) {
  for (int i = 0; i < 7; ++i) csv.field(std::string{});
}

int run_one_arm(const CommonOpts& o, const std::vector<int>& n_list,
                double level) {
  RunContext ctx(o, "one-arm");
  ctx.manifest.config["N_list"] = n_list;
  ctx.manifest.config["h"] = level;
  auto table =
      estimators::estimate_one_arm(o.d, level, n_list, o.reps, o.seed,
                                   o.workers);
  io::CsvWriter csv(ctx.path("one_arm.csv"));
  std::vector<std::string> cols{"row", "N"};
  for (auto& c : io::CsvWriter::estimate_columns()) cols.push_back(c);
  for (auto& c : fit_columns()) cols.push_back(c);
  csv.header(cols);
  for (const auto& r : table.rows) {
    csv.field(std::string("theta"));
    csv.field(r.N);
    csv.estimate_fields(r.theta);
    blank_fit_fields(csv);
    csv.end_row();
  }
  csv.field(std::string("loglog_fit"));
  csv.field(std::string{});
  blank_estimate_fields(csv);
  fit_fields(csv, table.fit);
  csv.end_row();
  csv.close();
  ctx.files.push_back(csv.path());
  ctx.finish();
  std::printf("one-arm: slope %.4f +- %.4f over %zu scales\n",
              table.fit.slope, table.fit.slope_stderr, table.rows.size());
  return 0;
}

int run_two_point(const CommonOpts& o, int box_radius) {
  RunContext ctx(o, "two-point");
  ctx.manifest.config["N"] = box_radius;
  const Point origin = Point::origin(o.d);
  std::vector<std::pair<Point, Point>> pairs;
  pairs.emplace_back(origin, Point::unit(o.d, 0, 1));
  pairs.emplace_back(origin, Point::unit(o.d, 0, 2));
  {
    Point y = Point::origin(o.d);
    y[0] = 2;
    if (o.d >= 2) y[1] = 2;
    pairs.emplace_back(origin, y);
  }
  auto report =
      estimators::estimate_arcsin(o.d, box_radius, pairs, o.reps, o.seed,
                                  o.workers);
  io::CsvWriter csv(ctx.path("two_point.csv"));
  std::vector<std::string> cols{"pair"};
  for (auto& c : io::CsvWriter::estimate_columns()) cols.push_back(c);
  cols.push_back("predicted");
  cols.push_back("z");
  csv.header(cols);
  for (const auto& p : report.pairs) {
    std::ostringstream os;
    os << p.x << "-" << p.y;
    csv.field(os.str());
    csv.estimate_fields(p.mc);
    csv.field(p.predicted);
    csv.field(p.z);
    csv.end_row();
    std::printf("two-point %s: mc %.5f pred %.5f z %.2f\n", os.str().c_str(),
                p.mc.mean, p.predicted, p.z);
  }
  csv.close();
  ctx.files.push_back(csv.path());
  ctx.finish();
  return 0;
}

int run_crossing(const CommonOpts& o, int n, int N) {
  RunContext ctx(o, "crossing");
  ctx.manifest.config["n"] = n;
  ctx.manifest.config["N"] = N;
  auto est = estimators::estimate_crossing(o.d, n, N, o.reps, o.seed,
                                           o.workers);
  io::CsvWriter csv(ctx.path("crossing.csv"));
  std::vector<std::string> cols{"n", "N"};
  for (auto& c : io::CsvWriter::estimate_columns()) cols.push_back(c);
  csv.header(cols);
  csv.field(n);
  csv.field(N);
  csv.estimate_fields(est);
  csv.end_row();
  csv.close();
  ctx.files.push_back(csv.path());
  ctx.finish();
  std::printf("crossing rho(%d,%d) = %.5f +- %.5f\n", n, N, est.mean,
              est.sem);
  return 0;
}

int run_volume_tail(const CommonOpts& o, const std::vector<std::int64_t>& ms,
                    int box_radius) {
  RunContext ctx(o, "volume-tail");
  ctx.manifest.config["M_list"] = ms;
  ctx.manifest.config["box_radius"] = box_radius;
  auto table = estimators::estimate_volume_tail(o.d, ms, box_radius, o.reps,
                                                o.seed, o.workers);
  io::CsvWriter csv(ctx.path("volume_tail.csv"));
  std::vector<std::string> cols{"row", "M"};
  for (auto& c : io::CsvWriter::estimate_columns()) cols.push_back(c);
  cols.push_back("censored_fraction");
  for (auto& c : fit_columns()) cols.push_back(c);
  csv.header(cols);
  for (const auto& r : table.rows) {
    csv.field(std::string("nu"));
    csv.field(r.M);
    csv.estimate_fields(r.nu);
    csv.field(r.censored_fraction);
    blank_fit_fields(csv);
    csv.end_row();
  }
  csv.field(std::string("loglog_fit"));
  csv.field(std::string{});
  blank_estimate_fields(csv);
  csv.field(table.boundary_touch_fraction);
  fit_fields(csv, table.fit);
  csv.end_row();
  csv.close();
  ctx.files.push_back(csv.path());
  ctx.finish();
  if (table.censor_warning) {
    std::fprintf(stderr,
                 "WARNING: censoring fraction %.3f at the largest M exceeds "
                 "5%%; enlarge the box\n",
                 table.rows.back().censored_fraction);
  }
  std::printf("volume-tail: slope %.4f +- %.4f (boundary touch %.4f)\n",
              table.fit.slope, table.fit.slope_stderr,
              table.boundary_touch_fraction);
  return 0;
}

int run_cond_volume(const CommonOpts& o, int M, int N,
                    std::uint64_t accepted) {
  RunContext ctx(o, "cond-volume");
  ctx.manifest.config["M"] = M;
  ctx.manifest.config["N"] = N;
  ctx.manifest.config["accepted"] = accepted;
  auto s = estimators::estimate_conditional_volume(o.d, M, N, accepted,
                                                   o.seed, o.workers);
  ctx.manifest.acceptance_rates["boundary_arm"] =
      double(s.accepted) / double(s.attempts);
  io::CsvWriter csv(ctx.path("cond_volume.csv"));
  csv.header({"M", "N", "accepted", "attempts", "median", "q1", "q3",
              "p_ge_1x_growth", "p_ge_2x_growth", "p_ge_4x_growth",
              "p_ge_twice_median"});
  csv.field(s.M);
  csv.field(s.N);
  csv.field(std::uint64_t(s.accepted));
  csv.field(std::uint64_t(s.attempts));
  csv.field(s.median);
  csv.field(s.q1);
  csv.field(s.q3);
  for (int i = 0; i < 3; ++i) csv.field(s.tail_at_lambda[i].mean);
  csv.field(s.p_ge_twice_median.mean);
  csv.end_row();
  csv.close();
  ctx.files.push_back(csv.path());
  ctx.finish();
  std::printf("cond-volume M=%d N=%d: median %.1f IQR [%.1f, %.1f] "
              "(acceptance %.4f)\n",
              M, N, s.median, s.q1, s.q3,
              double(s.accepted) / double(s.attempts));
  return 0;
}

int run_cond_two_point(const CommonOpts& o, int M, int N,
                       std::uint64_t accepted) {
  RunContext ctx(o, "cond-two-point");
  ctx.manifest.config["M"] = M;
  ctx.manifest.config["N"] = N;
  ctx.manifest.config["accepted"] = accepted;
  const Point y = Point::unit(o.d, 0, M);
  auto r = estimators::estimate_conditional_two_point(o.d, M, y, N, accepted,
                                                      o.seed, o.workers);
  ctx.manifest.acceptance_rates["boundary_arm"] =
      double(accepted) / double(r.attempts);
  io::CsvWriter csv(ctx.path("cond_two_point.csv"));
  std::vector<std::string> cols{"M", "N", "attempts"};
  for (auto& c : io::CsvWriter::estimate_columns()) cols.push_back(c);
  csv.header(cols);
  csv.field(M);
  csv.field(N);
  csv.field(std::uint64_t(r.attempts));
  csv.estimate_fields(r.p);
  csv.end_row();
  csv.close();
  ctx.files.push_back(csv.path());
  ctx.finish();
  std::printf("cond-two-point M=%d N=%d: p = %.5f +- %.5f\n", M, N, r.p.mean,
              r.p.sem);
  return 0;
}

int run_cap_tail(const CommonOpts& o, std::vector<double> t_list,
                 int box_radius) {
  RunContext ctx(o, "cap-tail");
  if (t_list.empty()) {
    // one decade above 2/G(0,0)
    const double t0 = 2.0 / greens::green_zero(o.d);
    for (double f : {1.0, 1.78, 3.16, 5.62, 10.0}) t_list.push_back(t0 * f);
  }
  ctx.manifest.config["T_list"] = t_list;
  ctx.manifest.config["box_radius"] = box_radius;
  auto table = estimators::estimate_capacity_tail(o.d, t_list, box_radius,
                                                  o.reps, o.seed, o.workers);
  io::CsvWriter csv(ctx.path("cap_tail.csv"));
  std::vector<std::string> cols{"row", "T"};
  for (auto& c : io::CsvWriter::estimate_columns()) cols.push_back(c);
  for (auto& c : fit_columns()) cols.push_back(c);
  cols.push_back("prefactor");
  cols.push_back("prefactor_predicted");
  csv.header(cols);
  for (const auto& r : table.rows) {
    csv.field(std::string("cap_tail"));
    csv.field(r.T);
    csv.estimate_fields(r.p);
    blank_fit_fields(csv);
    csv.field(std::string{});
    csv.field(std::string{});
    csv.end_row();
  }
  csv.field(std::string("loglog_fit"));
  csv.field(std::string{});
  blank_estimate_fields(csv);
  fit_fields(csv, table.fit);
  csv.field(table.prefactor);
  csv.field(table.prefactor_predicted);
  csv.end_row();
  csv.close();
  ctx.files.push_back(csv.path());
  ctx.finish();
  std::printf("cap-tail: slope %.4f +- %.4f prefactor %.4f (predicted %.4f)\n",
              table.fit.slope, table.fit.slope_stderr, table.prefactor,
              table.prefactor_predicted);
  return 0;
}

int run_quasi_mult(const CommonOpts& o, const std::vector<int>& n_list) {
  RunContext ctx(o, "quasi-mult");
  ctx.manifest.config["N_list"] = n_list;
  auto table =
      estimators::quasi_mult_ratio(o.d, n_list, o.reps, o.seed, o.workers);
  io::CsvWriter csv(ctx.path("quasi_mult.csv"));
  csv.header({"N", "p_joint", "p_joint_sem", "p_arm1", "p_arm1_sem",
              "p_arm2", "p_arm2_sem", "ratio", "ratio_sem"});
  for (const auto& r : table.rows) {
    csv.field(r.N);
    csv.field(r.p_joint.mean);
    csv.field(r.p_joint.sem);
    csv.field(r.p_arm1.mean);
    csv.field(r.p_arm1.sem);
    csv.field(r.p_arm2.mean);
    csv.field(r.p_arm2.sem);
    csv.field(r.ratio);
    csv.field(r.ratio_sem);
    csv.end_row();
    std::printf("quasi-mult N=%d ratio %.3f +- %.3f\n", r.N, r.ratio,
                r.ratio_sem);
  }
  csv.close();
  ctx.files.push_back(csv.path());
  ctx.finish();
  return 0;
}

int run_iic_compare(const CommonOpts& o, int N, std::uint64_t accepted,
                    std::uint64_t pilot) {
  RunContext ctx(o, "iic-compare");
  ctx.manifest.config["N"] = N;
  ctx.manifest.config["accepted"] = accepted;
  const double T =
      iic::calibrate_capacity_threshold(o.d, N, pilot, o.seed + 17,
                                        o.workers);
  ctx.manifest.config["capacity_T"] = T;

  std::vector<std::pair<iic::Conditioning, lattice::BoxGeom>> setups;
  setups.emplace_back(iic::Conditioning::boundary_arm(N),
                      lattice::BoxGeom(o.d, N));
  {
    // centered pair realization on the smaller midpoint box
    const int pt_radius = (3 * N) / 4;
    setups.emplace_back(iic::Conditioning::point_pair(Point::unit(o.d, 0, N)),
                        lattice::BoxGeom(o.d, pt_radius));
  }
  setups.emplace_back(iic::Conditioning::capacity_tail(T),
                      lattice::BoxGeom(o.d, N));

  auto battery = iic::default_battery(o.d);
  auto report =
      iic::equivalence_report(setups, battery, accepted, o.seed, o.workers);

  nlohmann::json j;
  j["battery"] = nlohmann::json::array();
  for (const auto& ev : battery) j["battery"].push_back(ev.name);
  j["conditionings"] = nlohmann::json::array();
  for (std::size_t i = 0; i < report.tables.size(); ++i) {
    const auto& t = report.tables[i];
    nlohmann::json tj;
    tj["conditioning"] = setups[i].first.describe();
    tj["box_radius"] = t.box_radius;
    tj["acceptance_rate"] = t.acceptance_rate;
    tj["accepted"] = t.accepted;
    tj["attempts"] = t.attempts;
    nlohmann::json probs = nlohmann::json::array();
    for (std::size_t e = 0; e < battery.size(); ++e) {
      probs.push_back({{"event", battery[e].name},
                       {"p", t.probabilities[e].mean},
                       {"sem", t.probabilities[e].sem}});
    }
    tj["probabilities"] = probs;
    j["conditionings"].push_back(tj);
    ctx.manifest.acceptance_rates[setups[i].first.describe()] =
        t.acceptance_rate;
  }
  j["pairs"] = nlohmann::json::array();
  for (const auto& p : report.pairs) {
    j["pairs"].push_back({{"i", p.i},
                          {"j", p.j},
                          {"z", p.z},
                          {"max_abs_z", p.max_abs_z},
                          {"flagged", p.flagged},
                          {"trend_only", p.trend_only}});
  }
  j["any_comparable_flag"] = report.any_comparable_flag;
  {
    std::ofstream os(ctx.path("iic_compare.json"));
    os << j.dump(2) << '\n';
  }
  ctx.files.push_back(ctx.path("iic_compare.json"));

  io::CsvWriter csv(ctx.path("iic_compare.csv"));
  csv.header({"event", "cond_i", "cond_j", "p_i", "p_j", "z"});
  for (const auto& p : report.pairs) {
    for (std::size_t e = 0; e < battery.size(); ++e) {
      csv.field(battery[e].name);
      csv.field(setups[p.i].first.describe());
      csv.field(setups[p.j].first.describe());
      csv.field(report.tables[p.i].probabilities[e].mean);
      csv.field(report.tables[p.j].probabilities[e].mean);
      csv.field(p.z[e]);
      csv.end_row();
    }
  }
  csv.close();
  ctx.files.push_back(csv.path());
  ctx.finish();
  std::printf("iic-compare: max |z| over comparable pairs: %s\n",
              report.any_comparable_flag ? "FLAGGED" : "all below 3");
  return report.any_comparable_flag ? 1 : 0;
}

int run_loop_soup_check(const CommonOpts& o, int N) {
  RunContext ctx(o, "loop-soup-check");
  ctx.manifest.config["N"] = N;
  // Poissonization counts on B(1)
  const lattice::BoxGeom b1(o.d, 1);
  loop::LoopMeasure measure(b1, 24);
  const std::int64_t origin = b1.index(Point::origin(o.d));
  const double expected_len2 = 0.5 * measure.bucket_mass(origin, 2);
  stats::StreamingStats len2_counts;
  const std::uint64_t soups = std::min<std::uint64_t>(o.reps, 200000);
  for (std::uint64_t s = 0; s < soups; ++s) {
    auto soup = loop::sample_loop_soup(measure, 0.5, o.seed, s);
    int c = 0;
    for (const auto& l : soup.loops) {
      if (l.length() == 2 && b1.index(l.root) == origin) ++c;
    }
    len2_counts.add(c);
  }
  const double z_len2 =
      (len2_counts.mean() - expected_len2) / len2_counts.sem();
  // occupation identity
  stats::StreamingStats occ;
  for (std::uint64_t s = 0; s < soups / 4; ++s) {
    auto soup = loop::sample_loop_soup(measure, 0.5, o.seed + 1, s);
    auto f = loop::occupation_field(soup);
    occ.add(double(f.visits[origin]));
  }
  const double occ_expected = 0.5 * measure.occupation_mean(origin);
  const double z_occ = (occ.mean() - occ_expected) / occ.sem();
  // sign-cluster factor 2
  auto sign = loop::sign_cluster_equivalence(o.d, N, o.reps, o.seed + 2,
                                             o.workers);
  io::CsvWriter csv(ctx.path("loop_soup_check.csv"));
  csv.header({"check", "value", "expected", "z"});
  csv.field(std::string("len2_count_mean"));
  csv.field(len2_counts.mean());
  csv.field(expected_len2);
  csv.field(z_len2);
  csv.end_row();
  csv.field(std::string("occupation_mean"));
  csv.field(occ.mean());
  csv.field(occ_expected);
  csv.field(z_occ);
  csv.end_row();
  csv.field(std::string("factor2_arm"));
  csv.field(sign.level_arm.mean);
  csv.field(0.5 * sign.sign_arm.mean);
  csv.field(sign.factor2_z);
  csv.end_row();
  csv.close();
  ctx.files.push_back(csv.path());
  ctx.finish();
  std::printf("loop-soup-check: len2 z=%.2f occupation z=%.2f factor2 "
              "z=%.2f ks_p=%.4f\n",
              z_len2, z_occ, sign.factor2_z, sign.ks_p_sign_symmetry);
  return (std::abs(z_len2) < 3 && std::abs(z_occ) < 3 &&
          std::abs(sign.factor2_z) < 3)
             ? 0
             : 1;
}

int run_green(const CommonOpts& o, int range, int grid,
              const std::string& file) {
  RunContext ctx(o, "green");
  ctx.manifest.config["range"] = range;
  ctx.manifest.config["grid"] = grid;
  greens::FreeGreenTable table =
      grid > 0 ? greens::FreeGreenTable::build_fourier(o.d, range, grid)
               : greens::FreeGreenTable::build_bessel(o.d, range);
  const std::string path =
      file.empty() ? ctx.path("free_green.csv") : file;
  table.save_csv(path);
  ctx.files.push_back(path);
  ctx.finish();
  std::printf("green: wrote %s (G(0,0) = %.12f)\n", path.c_str(),
              table.at(Point::origin(o.d)));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gfflab: exact sampling laboratory for metric-graph GFF "
               "level-set percolation"};
  app.set_version_flag("--version", kVersion);
  app.set_config("--config", "", "key = value configuration file");
  app.require_subcommand(1);

  CommonOpts o;

  auto* selftest = app.add_subcommand(
      "selftest", "oracle-equivalence suite; exits 0 when all checks pass");
  add_common(selftest, o);

  auto* green = app.add_subcommand("green", "write the free Green table");
  int green_range = 16, green_grid = 256;
  std::string green_file;
  add_common(green, o);
  green->add_option("--range", green_range, "max displacement per axis");
  green->add_option("--grid", green_grid,
                    "Fourier grid per axis (0 = Bessel backend)");
  green->add_option("--file", green_file, "output CSV path");

  auto* two_point = app.add_subcommand("two-point",
                                       "arcsin two-point comparison");
  int tp_N = 8;
  add_common(two_point, o);
  two_point->add_option("--N", tp_N, "box radius");

  auto* one_arm = app.add_subcommand("one-arm", "one-arm probabilities");
  std::vector<int> oa_list{8, 16, 32, 64};
  double oa_h = 0.0;
  add_common(one_arm, o);
  one_arm->add_option("--N-list", oa_list, "box radii")->delimiter(',');
  one_arm->add_option("--h", oa_h, "level (negative = supercritical)");

  auto* crossing = app.add_subcommand("crossing", "annulus crossing");
  int cr_n = 4, cr_N = 16;
  add_common(crossing, o);
  crossing->add_option("--n", cr_n, "inner radius");
  crossing->add_option("--N", cr_N, "outer radius");

  auto* volume_tail = app.add_subcommand("volume-tail",
                                         "cluster volume tail");
  std::vector<std::int64_t> vt_list{16, 64, 256, 1024};
  int vt_box = 96;
  add_common(volume_tail, o);
  volume_tail->add_option("--M-list", vt_list, "volume thresholds")
      ->delimiter(',');
  volume_tail->add_option("--box-radius", vt_box, "sampling box radius");

  auto* cond_volume = app.add_subcommand(
      "cond-volume", "volume in B(M) conditioned on the arm to B(N)");
  int cv_M = 8, cv_N = 0;
  std::uint64_t cv_acc = 2000;
  add_common(cond_volume, o);
  cond_volume->add_option("--M", cv_M, "volume window radius");
  cond_volume->add_option("--N", cv_N, "arm scale (default 4M)");
  cond_volume->add_option("--accepted", cv_acc, "accepted samples");

  auto* cond_two_point = app.add_subcommand(
      "cond-two-point", "P(0 <-> M e1) conditioned on the arm to B(N)");
  int ct_M = 8, ct_N = 0;
  std::uint64_t ct_acc = 2000;
  add_common(cond_two_point, o);
  cond_two_point->add_option("--M", ct_M, "target distance");
  cond_two_point->add_option("--N", ct_N, "arm scale (default 4M)");
  cond_two_point->add_option("--accepted", ct_acc, "accepted samples");

  auto* cap_tail = app.add_subcommand("cap-tail",
                                      "capacity tail of the origin cluster");
  std::vector<double> capt_list;
  int capt_box = 48;
  add_common(cap_tail, o);
  cap_tail->add_option("--T-list", capt_list, "capacity thresholds")
      ->delimiter(',');
  cap_tail->add_option("--box-radius", capt_box, "sampling box radius");

  auto* quasi = app.add_subcommand("quasi-mult",
                                   "quasi-multiplicativity ratio");
  std::vector<int> qm_list{4, 8, 16};
  add_common(quasi, o);
  quasi->add_option("--N-list", qm_list, "intermediate scales")
      ->delimiter(',');

  auto* iic_cmp = app.add_subcommand(
      "iic-compare", "cylinder battery across the IIC conditionings");
  int ic_N = 64;
  std::uint64_t ic_acc = 20000, ic_pilot = 20000;
  add_common(iic_cmp, o);
  iic_cmp->add_option("--N", ic_N, "conditioning scale");
  iic_cmp->add_option("--accepted", ic_acc, "accepted samples per leg");
  iic_cmp->add_option("--pilot", ic_pilot,
                      "pilot replicates for the capacity calibration");

  auto* loop_check = app.add_subcommand("loop-soup-check",
                                        "loop-soup Poissonization checks");
  int lc_N = 8;
  add_common(loop_check, o);
  loop_check->add_option("--N", lc_N, "sign-cluster box radius");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*selftest) {
      validate_dim(o);
      return selftest::run(o.seed, o.workers) ? 0 : 1;
    }
    if (*green) return run_green(o, green_range, green_grid, green_file);
    if (*two_point) return run_two_point(o, tp_N);
    if (*one_arm) return run_one_arm(o, oa_list, oa_h);
    if (*crossing) return run_crossing(o, cr_n, cr_N);
    if (*volume_tail) return run_volume_tail(o, vt_list, vt_box);
    if (*cond_volume) {
      return run_cond_volume(o, cv_M, cv_N > 0 ? cv_N : 4 * cv_M, cv_acc);
    }
    if (*cond_two_point) {
      return run_cond_two_point(o, ct_M, ct_N > 0 ? ct_N : 4 * ct_M, ct_acc);
    }
    if (*cap_tail) return run_cap_tail(o, capt_list, capt_box);
    if (*quasi) return run_quasi_mult(o, qm_list);
    if (*iic_cmp) return run_iic_compare(o, ic_N, ic_acc, ic_pilot);
    if (*loop_check) return run_loop_soup_check(o, lc_N);
  } catch (const CapacityError& e) {
    std::fprintf(stderr, "resource limit: %s\n", e.what());
    return 3;
  } catch (const AcceptanceError& e) {
    std::fprintf(stderr,
                 "conditioning failed: %s (attempts %llu, accepted %llu)\n",
                 e.what(), (unsigned long long)e.attempts,
                 (unsigned long long)e.accepted);
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
