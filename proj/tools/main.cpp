#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ricci/constructions.hpp"
#include "ricci/curvature.hpp"
#include "ricci/errors.hpp"
#include "ricci/gh.hpp"
#include "ricci/parallel.hpp"
#include "ricci/spaces.hpp"
#include "ricci/version.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using ricci::DomainError;
using ricci::NumericError;
using ricci::ParameterError;
namespace construct = ricci::construct;
namespace curvature = ricci::curvature;
namespace gh = ricci::gh;
namespace spaces = ricci::spaces;

struct GlobalOptions {
  std::string out = ".";
  int threads = 0;
};

void apply_globals(const GlobalOptions& g) {
  ricci::set_max_threads(g.threads);
}

/// Output directory: the RICCI_FORGE_OUT environment variable wins over the
/// --out flag; the directory is created on demand.
fs::path resolve_out_dir(const GlobalOptions& g) {
  const char* env = std::getenv("RICCI_FORGE_OUT");
  fs::path dir = (env != nullptr && *env != '\0') ? fs::path(env)
                                                  : fs::path(g.out);
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ParameterError("cannot open output file " + path.string());
  os << text;
  std::cout << "wrote " << path.string() << "\n";
}

void write_report(const fs::path& path, const json& report) {
  write_text(path, report.dump(2) + "\n");
}

json report_shell(const std::string& command, json config) {
  return {{"version", ricci::kVersion},
          {"command", command},
          {"config", std::move(config)}};
}

std::pair<double, double> parse_pair(const std::string& text,
                                     const std::string& flag) {
  std::istringstream is(text);
  double lo = 0, hi = 0;
  char sep = 0;
  if (!(is >> lo >> sep >> hi) || sep != ':' || !is.eof())
    throw ParameterError(flag + " expects lo:hi, got '" + text + "'");
  return {lo, hi};
}

ricci::GridSpec parse_grid(const std::string& text) {
  std::istringstream is(text);
  ricci::GridSpec grid;
  char s1 = 0, s2 = 0;
  if (!(is >> grid.lo >> s1 >> grid.hi >> s2 >> grid.step) || s1 != ':' ||
      s2 != ':' || !is.eof())
    throw ParameterError("--grid expects lo:hi:step, got '" + text + "'");
  return grid;
}

/// "--c auto" picks half the recorded circle-collapse threshold.
double resolve_c(const std::string& word) {
  if (word == "auto") return construct::kRecordedBergerThreshold / 2.0;
  try {
    std::size_t used = 0;
    const double value = std::stod(word, &used);
    if (used != word.size()) throw std::invalid_argument(word);
    return value;
  } catch (const std::exception&) {
    throw ParameterError("--c expects a number or 'auto', got '" + word + "'");
  }
}

struct FamilyOptions {
  std::string family;
  double a = 1.0;
  double b = 0.3;
  double c = 0.075;
  double d = 0.25;
  int n = 4;
};

void add_family_flags(CLI::App* cmd, FamilyOptions* f, bool need_family) {
  auto* opt = cmd->add_option("--family", f->family,
                              "m-open | m-closed | n-open | n-closed | "
                              "suspension");
  if (need_family) opt->required();
  cmd->add_option("--a", f->a, "core scale of the open conformal model");
  cmd->add_option("--b", f->b,
                  "cone-angle parameter of m-open (its slope is sin(b)/2)");
  cmd->add_option("--c", f->c, "asymptotic cone slope");
  cmd->add_option("--d", f->d, "cap size of the closed families");
  cmd->add_option("--n", f->n, "cyclic quotient order of the circle fiber");
}

json family_config(const FamilyOptions& f) {
  return {{"family", f.family}, {"a", f.a}, {"b", f.b},
          {"c", f.c},           {"d", f.d}, {"n", f.n}};
}

construct::MetricFamilySpec build_family(const FamilyOptions& f) {
  if (f.family == "m-open")
    return construct::build_m_profile(0.5 * std::sin(f.b), f.b);
  if (f.family == "m-closed")
    return construct::build_m_closed_profile(f.c, f.d);
  if (f.family == "n-open") return construct::build_n_profiles(f.n, f.c);
  if (f.family == "n-closed")
    return construct::build_n_closed_profiles(f.c, f.d);
  if (f.family == "suspension") return construct::limit_suspension(f.c);
  throw ParameterError("unknown family '" + f.family + "'");
}

/// In the two-space comparisons the suspension plays the closed families'
/// common limit, whose warp amplitude is half their cone slope.
construct::MetricFamilySpec build_comparison_family(const std::string& family,
                                                    const FamilyOptions& f) {
  FamilyOptions g = f;
  g.family = family;
  if (family == "suspension") g.c = f.c / 2.0;
  return build_family(g);
}

spaces::SampledSpace sample_family(const construct::MetricFamilySpec& spec,
                                   std::size_t points, double resolution,
                                   std::uint64_t seed) {
  const double res =
      resolution > 0 ? resolution
                     : spaces::suggest_resolution(
                           spec.sampling_warp(),
                           spaces::action_from_label(spec.group).order, points);
  return spaces::sample_space(spec, points, res, seed);
}

int run_build_spec(const GlobalOptions& g, const FamilyOptions& f) {
  apply_globals(g);
  const auto spec = build_family(f);
  auto report = report_shell("build-spec", family_config(f));
  report["spec"] = spec.to_json();
  write_report(resolve_out_dir(g) / "build-spec.json", report);
  const bool ok = spec.all_certificates_pass();
  std::cout << "family " << spec.kind << " group " << spec.group << " with "
            << spec.certificates.size() << " certificate(s): "
            << (ok ? "pass" : "FAIL") << "\n";
  return ok ? 0 : 2;
}

int run_verify(const GlobalOptions& g, const FamilyOptions& f,
               const std::string& grid_text, double tol) {
  apply_globals(g);
  const auto spec = build_family(f);
  ricci::GridSpec grid;
  if (!grid_text.empty()) {
    grid = parse_grid(grid_text);
  } else {
    if (spec.certificates.empty())
      throw ParameterError("family carries no recorded grid; pass --grid");
    grid = spec.certificates.front().grid;
  }

  curvature::CurvatureCertificate cert;
  if (spec.profiles.count("rho") != 0) {
    const int order = spaces::action_from_label(spec.group).order;
    cert = curvature::verify_nonneg(
        curvature::BergerMetric(spec.profile("rho"), spec.profile("phi"),
                                order),
        grid, tol);
  } else {
    cert = curvature::verify_nonneg(
        curvature::WarpedMetric(spec.profile("warp")), grid, tol);
  }

  auto config = family_config(f);
  config["grid"] = {{"lo", grid.lo}, {"hi", grid.hi}, {"step", grid.step}};
  config["tol"] = tol;
  auto report = report_shell("verify-curvature", config);
  report["certificate"] = cert.to_json();
  write_report(resolve_out_dir(g) / "verify-curvature.json", report);
  std::cout << "certificate " << (cert.passed ? "pass" : "FAIL")
            << " (tolerance " << tol << ")\n";
  return cert.passed ? 0 : 2;
}

int run_threshold(const GlobalOptions& g, const std::string& family, int n,
                  const std::string& bracket_text, double width_tol) {
  apply_globals(g);
  if (family != "berger")
    throw ParameterError("threshold supports --family berger");
  const auto [lo, hi] = parse_pair(bracket_text, "--bracket");
  const auto result = construct::find_berger_threshold(n, lo, hi, width_tol);
  auto report = report_shell("threshold", {{"family", family},
                                           {"n", n},
                                           {"bracket_lo", lo},
                                           {"bracket_hi", hi},
                                           {"width_tol", width_tol}});
  report["result"] = result.to_json();
  write_report(resolve_out_dir(g) / "threshold.json", report);
  std::cout << "c_max " << result.c_max << " certified on ["
            << result.bracket_lo << ", " << result.bracket_hi << ")\n";
  return result.witness.passed ? 0 : 2;
}

int run_volume(const GlobalOptions& g, const FamilyOptions& f,
               std::size_t mc_samples, std::uint64_t seed) {
  apply_globals(g);
  const auto spec = build_family(f);
  const double vol = spaces::volume_closed(spec);
  auto config = family_config(f);
  config["mc_samples"] = mc_samples;
  config["seed"] = seed;
  auto report = report_shell("volume", config);
  report["volume"] = vol;
  std::cout << "volume " << vol << "\n";
  if (mc_samples > 0) {
    const auto mc = spaces::volume_mc(spec, mc_samples, seed);
    report["mc_estimate"] = mc.estimate;
    report["mc_stderror"] = mc.stderror;
    std::cout << "monte carlo " << mc.estimate << " +- " << mc.stderror
              << "\n";
  }
  write_report(resolve_out_dir(g) / "volume.json", report);
  return 0;
}

json sampling_config(const FamilyOptions& f, std::size_t points,
                     double resolution, std::uint64_t seed) {
  auto config = family_config(f);
  config["points"] = points;
  config["resolution"] = resolution;
  config["seed"] = seed;
  return config;
}

int run_diameter(const GlobalOptions& g, const FamilyOptions& f,
                 std::size_t points, double resolution, std::uint64_t seed) {
  apply_globals(g);
  const auto spec = build_family(f);
  const auto space = sample_family(spec, points, resolution, seed);
  auto report = report_shell("diameter",
                             sampling_config(f, points, resolution, seed));
  report["diameter"] = spaces::diameter(space);
  report["resolution"] = space.resolution;
  report["warnings"] = space.warnings;
  write_report(resolve_out_dir(g) / "diameter.json", report);
  std::cout << "diameter " << spaces::diameter(space) << " +- "
            << space.resolution << "\n";
  return 0;
}

int run_displacement(const GlobalOptions& g, const std::string& group,
                     std::size_t samples, std::uint64_t seed) {
  apply_globals(g);
  bool trivial = false;
  const double moved = spaces::min_displacement(
      spaces::action_from_label(group), samples, seed, &trivial);
  auto report = report_shell("displacement", {{"group", group},
                                              {"samples", samples},
                                              {"seed", seed}});
  report["min_displacement"] = moved;
  report["trivial"] = trivial;
  write_report(resolve_out_dir(g) / "displacement.json", report);
  std::cout << "min displacement " << moved << "\n";
  return 0;
}

int run_sample(const GlobalOptions& g, const FamilyOptions& f,
               std::size_t points, double resolution, std::uint64_t seed) {
  apply_globals(g);
  const auto spec = build_family(f);
  const auto space = sample_family(spec, points, resolution, seed);
  const auto dir = resolve_out_dir(g);

  std::ostringstream pts, dst;
  spaces::write_points_csv(space, pts);
  spaces::write_distances_csv(space, dst);
  write_text(dir / "sample_points.csv", pts.str());
  write_text(dir / "sample_distances.csv", dst.str());

  auto report = report_shell("sample",
                             sampling_config(f, points, resolution, seed));
  report["n"] = space.size();
  report["resolution"] = space.resolution;
  report["diameter"] = spaces::diameter(space);
  report["warnings"] = space.warnings;
  write_report(dir / "sample.json", report);
  std::cout << "sampled " << space.size() << " points at resolution "
            << space.resolution << "\n";
  return 0;
}

int run_gh(const GlobalOptions& g, const FamilyOptions& f,
           const std::string& family_a, const std::string& family_b,
           std::size_t points, double resolution, std::uint64_t seed,
           const std::string& corr_kind, const std::string& band_text) {
  apply_globals(g);
  const auto spec_a = build_comparison_family(family_a, f);
  const auto spec_b = build_comparison_family(family_b, f);
  const double res =
      resolution > 0 ? resolution
                     : spaces::suggest_resolution(
                           spec_a.sampling_warp(),
                           spaces::action_from_label(spec_a.group).order,
                           points);
  const auto plan = spaces::build_sampling_plan(
      spec_a.sampling_warp(), spaces::action_from_label(spec_a.group), points,
      res, seed);
  std::optional<Eigen::Matrix4d> transform;
  if (spec_a.group != spec_b.group) transform = spaces::psi_matrix();
  const auto space_a = spaces::sample_space_with_plan(spec_a, plan);
  const auto space_b = spaces::sample_space_with_plan(spec_b, plan, transform);

  gh::Correspondence corr;
  if (corr_kind == "identity") {
    corr = gh::identity_correspondence(space_a.size());
  } else if (corr_kind == "band") {
    double lo = f.d, hi = 3.14159265358979323846 - f.d;
    if (!band_text.empty()) std::tie(lo, hi) = parse_pair(band_text, "--band");
    corr = gh::band_correspondence(space_a, space_b, lo, hi);
  } else {
    throw ParameterError("--correspondence expects identity or band");
  }

  gh::DistortionWitness witness;
  const double upper = gh::gh_upper(space_a, space_b, corr, &witness);
  const double lower = gh::gh_lower(space_a, space_b);

  auto config = family_config(f);
  config["family_a"] = family_a;
  config["family_b"] = family_b;
  config["points"] = points;
  config["resolution"] = resolution;
  config["seed"] = seed;
  config["correspondence"] = corr_kind;
  config["band"] = band_text;
  auto report = report_shell("gh", config);
  report["gh_upper"] = upper;
  report["gh_lower"] = lower;
  report["witness"] = witness.to_json();
  report["resolution_a"] = space_a.resolution;
  report["resolution_b"] = space_b.resolution;
  report["diameter_a"] = spaces::diameter(space_a);
  report["diameter_b"] = spaces::diameter(space_b);
  write_report(resolve_out_dir(g) / "gh.json", report);
  std::cout << "gh upper " << upper << " lower " << lower << " (resolutions "
            << space_a.resolution << ", " << space_b.resolution << ")\n";
  return 0;
}

int run_converge(const GlobalOptions& g, const std::string& c_text,
                 const std::vector<int>& i_list, std::size_t points,
                 std::uint64_t seed) {
  apply_globals(g);
  const double c = resolve_c(c_text);
  const auto table = gh::convergence_experiment(c, i_list, points, seed);
  const auto dir = resolve_out_dir(g);

  std::ostringstream csv;
  table.write_csv(csv);
  write_text(dir / "converge.csv", csv.str());

  auto report = report_shell("converge", {{"c", c},
                                          {"i", i_list},
                                          {"points", points},
                                          {"seed", seed}});
  report["table"] = table.to_json();
  write_report(dir / "converge.json", report);
  std::cout << csv.str();
  std::cout << "fitted_c " << table.fitted_c << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Builds nonnegatively curved metric families, certifies them, "
               "and estimates Gromov-Hausdorff distances between their "
               "sampled geometries."};
  app.set_config("--config", "", "flat key=value config file; flags override");
  app.require_subcommand(1);

  GlobalOptions global;
  app.add_option("--out", global.out,
                 "output directory (RICCI_FORGE_OUT overrides)");
  app.add_option("--threads", global.threads,
                 "cap worker threads (0 = hardware default)");

  int code = 0;

  auto* cmd_build = app.add_subcommand("build-spec",
                                       "build a family and write its spec");
  auto build_f = std::make_shared<FamilyOptions>();
  add_family_flags(cmd_build, build_f.get(), true);
  cmd_build->callback([&code, &global, build_f] {
    code = run_build_spec(global, *build_f);
  });

  auto* cmd_verify = app.add_subcommand(
      "verify-curvature", "re-run a curvature certificate on a grid");
  auto verify_f = std::make_shared<FamilyOptions>();
  auto verify_grid = std::make_shared<std::string>();
  auto verify_tol = std::make_shared<double>(1e-8);
  add_family_flags(cmd_verify, verify_f.get(), true);
  cmd_verify->add_option("--grid", *verify_grid,
                         "lo:hi:step (default: the recorded build grid)");
  cmd_verify->add_option("--tol", *verify_tol, "eigenvalue tolerance");
  cmd_verify->callback([&code, &global, verify_f, verify_grid, verify_tol] {
    code = run_verify(global, *verify_f, *verify_grid, *verify_tol);
  });

  auto* cmd_threshold = app.add_subcommand(
      "threshold", "largest certified cone slope of the collapsing family");
  auto thr_family = std::make_shared<std::string>("berger");
  auto thr_n = std::make_shared<int>(4);
  auto thr_bracket = std::make_shared<std::string>("0.001:2");
  auto thr_width = std::make_shared<double>(1e-6);
  cmd_threshold->add_option("--family", *thr_family, "berger");
  cmd_threshold->add_option("--n", *thr_n, "cyclic quotient order");
  cmd_threshold->add_option("--bracket", *thr_bracket, "lo:hi search bracket");
  cmd_threshold->add_option("--width-tol", *thr_width, "bracket width target");
  cmd_threshold->callback([&code, &global, thr_family, thr_n, thr_bracket,
                           thr_width] {
    code = run_threshold(global, *thr_family, *thr_n, *thr_bracket, *thr_width);
  });

  auto* cmd_volume = app.add_subcommand("volume",
                                        "closed-form and Monte Carlo volume");
  auto vol_f = std::make_shared<FamilyOptions>();
  auto vol_mc = std::make_shared<std::size_t>(0);
  auto vol_seed = std::make_shared<std::uint64_t>(1);
  add_family_flags(cmd_volume, vol_f.get(), true);
  cmd_volume->add_option("--mc-samples", *vol_mc,
                         "Monte Carlo sample count (0 = skip, else >= 10000)");
  cmd_volume->add_option("--seed", *vol_seed, "Monte Carlo seed");
  cmd_volume->callback([&code, &global, vol_f, vol_mc, vol_seed] {
    code = run_volume(global, *vol_f, *vol_mc, *vol_seed);
  });

  auto* cmd_diameter = app.add_subcommand("diameter",
                                          "diameter of a sampled family");
  auto diam_f = std::make_shared<FamilyOptions>();
  auto diam_points = std::make_shared<std::size_t>(800);
  auto diam_res = std::make_shared<double>(0);
  auto diam_seed = std::make_shared<std::uint64_t>(1);
  add_family_flags(cmd_diameter, diam_f.get(), true);
  cmd_diameter->add_option("--points", *diam_points, "sample budget");
  cmd_diameter->add_option("--resolution", *diam_res,
                           "target covering scale (0 = auto)");
  cmd_diameter->add_option("--seed", *diam_seed, "sampling seed");
  cmd_diameter->callback([&code, &global, diam_f, diam_points, diam_res,
                          diam_seed] {
    code = run_diameter(global, *diam_f, *diam_points, *diam_res, *diam_seed);
  });

  auto* cmd_disp = app.add_subcommand(
      "displacement", "minimum displacement of a sphere group action");
  auto disp_group = std::make_shared<std::string>();
  auto disp_samples = std::make_shared<std::size_t>(10000);
  auto disp_seed = std::make_shared<std::uint64_t>(1);
  cmd_disp->add_option("--group", *disp_group, "trivial | mu_<k> | iota")
      ->required();
  cmd_disp->add_option("--samples", *disp_samples, "sample count");
  cmd_disp->add_option("--seed", *disp_seed, "sampling seed");
  cmd_disp->callback([&code, &global, disp_group, disp_samples, disp_seed] {
    code = run_displacement(global, *disp_group, *disp_samples, *disp_seed);
  });

  auto* cmd_sample = app.add_subcommand(
      "sample", "sample a family and export points and distances");
  auto samp_f = std::make_shared<FamilyOptions>();
  auto samp_points = std::make_shared<std::size_t>(800);
  auto samp_res = std::make_shared<double>(0);
  auto samp_seed = std::make_shared<std::uint64_t>(1);
  add_family_flags(cmd_sample, samp_f.get(), true);
  cmd_sample->add_option("--points", *samp_points, "sample budget");
  cmd_sample->add_option("--resolution", *samp_res,
                         "target covering scale (0 = auto)");
  cmd_sample->add_option("--seed", *samp_seed, "sampling seed");
  cmd_sample->callback([&code, &global, samp_f, samp_points, samp_res,
                        samp_seed] {
    code = run_sample(global, *samp_f, *samp_points, *samp_res, *samp_seed);
  });

  auto* cmd_gh = app.add_subcommand(
      "gh", "upper and lower distance bounds between two sampled families");
  auto gh_f = std::make_shared<FamilyOptions>();
  auto gh_a = std::make_shared<std::string>();
  auto gh_b = std::make_shared<std::string>();
  auto gh_points = std::make_shared<std::size_t>(800);
  auto gh_res = std::make_shared<double>(0);
  auto gh_seed = std::make_shared<std::uint64_t>(1);
  auto gh_corr = std::make_shared<std::string>("band");
  auto gh_band = std::make_shared<std::string>();
  add_family_flags(cmd_gh, gh_f.get(), false);
  cmd_gh->add_option("--family-a", *gh_a,
                     "m-closed | n-closed | suspension")->required();
  cmd_gh->add_option("--family-b", *gh_b,
                     "m-closed | n-closed | suspension (suspension is built "
                     "at slope c/2, the closed families' limit)")->required();
  cmd_gh->add_option("--points", *gh_points, "shared sample budget");
  cmd_gh->add_option("--resolution", *gh_res,
                     "target covering scale (0 = auto)");
  cmd_gh->add_option("--seed", *gh_seed, "sampling seed");
  cmd_gh->add_option("--correspondence", *gh_corr, "identity | band");
  cmd_gh->add_option("--band", *gh_band,
                     "lo:hi band for the band correspondence "
                     "(default d:pi-d)");
  cmd_gh->callback([&code, &global, gh_f, gh_a, gh_b, gh_points, gh_res,
                    gh_seed, gh_corr, gh_band] {
    code = run_gh(global, *gh_f, *gh_a, *gh_b, *gh_points, *gh_res, *gh_seed,
                  *gh_corr, *gh_band);
  });

  auto* cmd_converge = app.add_subcommand(
      "converge", "cap-size refinement experiment against the common limit");
  auto conv_c = std::make_shared<std::string>("auto");
  auto conv_i = std::make_shared<std::vector<int>>(std::vector<int>{2, 4, 8,
                                                                    16});
  auto conv_points = std::make_shared<std::size_t>(2000);
  auto conv_seed = std::make_shared<std::uint64_t>(7);
  cmd_converge->add_option("--c", *conv_c,
                           "cone slope, or 'auto' for half the recorded "
                           "threshold");
  cmd_converge->add_option("--i", *conv_i, "refinement indices, e.g. 2,4,8,16")
      ->delimiter(',');
  cmd_converge->add_option("--points", *conv_points, "points per space");
  cmd_converge->add_option("--seed", *conv_seed, "sampling seed");
  cmd_converge->callback([&code, &global, conv_c, conv_i, conv_points,
                          conv_seed] {
    code = run_converge(global, *conv_c, *conv_i, *conv_points, *conv_seed);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  } catch (const ParameterError& e) {
    std::cerr << "parameter error: " << e.what() << "\n";
    return 1;
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return 1;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 2;
  }
  return code;
}
