// rft: command-line front end for convolution-field RFT inference and the
// Monte-Carlo harness.

#include <cmath>
#include <cstdio>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "rft/euler.hpp"
#include "rft/gaussianize.hpp"
#include "rft/infer.hpp"
#include "rft/io.hpp"
#include "rft/sim.hpp"
#include "rft/stats.hpp"

using json = nlohmann::ordered_json;
using namespace rft;

namespace {

/// Tabular output in CSV (header row) or as a JSON array of objects.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<json>> rows;

  void print(std::ostream& os, const std::string& format) const {
    if (format == "json") {
      json arr = json::array();
      for (const auto& r : rows) {
        json o = json::object();
        for (std::size_t i = 0; i < header.size(); ++i) o[header[i]] = r[i];
        arr.push_back(o);
      }
      os << arr.dump(2) << '\n';
      return;
    }
    for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
    os << '\n';
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << cell(r[i]);
      os << '\n';
    }
  }

  static std::string cell(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number()) return num(v.get<double>());
    if (v.is_null()) return "nan";
    return v.dump();
  }

  static std::string num(double x) {
    if (std::isnan(x)) return "nan";
    std::ostringstream os;
    os << std::setprecision(10) << x;
    return os.str();
  }
};

json jnum(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

const char* axis_name(int d) { return d == 0 ? "x" : d == 1 ? "y" : "z"; }

int parse_resolution(const std::string& s) {
  if (s == "inf" || s == "infinity") return kResolutionInfinity;
  if (s == "0") return 0;
  if (s == "1") return 1;
  throw Error("resolution must be 0, 1 or inf");
}

LKCVector parse_lkcs(const std::vector<double>& v) {
  if (v.size() < 2 || v.size() > 4) throw Error("--lkcs needs L0..LD with D in 1..3");
  return LKCVector{static_cast<int>(v.size()) - 1, v, LKCMethod::fwhm};
}

ECDensityParams density(double df, bool gaussian) {
  if (gaussian) return ECDensityParams::gaussian_field();
  if (!(df > 0.0)) throw Error("--df is required for t-fields (or pass --gaussian)");
  return ECDensityParams::t_field(df);
}

void add_format(CLI::App* cmd, std::string& format) {
  cmd->add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random field theory inference with convolution fields"};
  app.require_subcommand(1);
  std::string format = "csv";

  // infer ---------------------------------------------------------------------
  auto* infer_cmd = app.add_subcommand("infer", "Test for non-zero mean in a sample container");
  std::string in_path, out_path, regions_path, res_str = "inf";
  InferOptions io;
  double alpha = 0.05;
  std::string tails = "two";
  bool gauss = false, text = false;
  infer_cmd->add_option("--input", in_path, "Sample container")->required();
  infer_cmd->add_option("--fwhm", io.fwhm, "Kernel FWHM in voxels")->required();
  infer_cmd->add_option("--resolution", res_str, "Supremum over V_r: 0, 1 or inf")->capture_default_str();
  infer_cmd->add_option("--lkc-resolution", io.lkc_resolution, "Added resolution for LKC estimation")
      ->capture_default_str();
  infer_cmd->add_option("--alpha", alpha, "FWER level")->capture_default_str();
  infer_cmd->add_option("--tails", tails, "one or two")->capture_default_str();
  infer_cmd->add_flag("--gaussianize", gauss, "Gaussianize the data first");
  infer_cmd->add_option("--regions", regions_path, "Write significant regions as CSV");
  add_format(infer_cmd, format);

  // tstat ---------------------------------------------------------------------
  auto* tstat_cmd = app.add_subcommand("tstat", "One-sample t-field on an added-resolution grid");
  int r_grid = 1;
  tstat_cmd->add_option("--input", in_path, "Sample container")->required();
  tstat_cmd->add_option("--fwhm", io.fwhm, "Kernel FWHM in voxels")->required();
  tstat_cmd->add_option("--resolution", r_grid, "Added resolution r")->capture_default_str();
  tstat_cmd->add_flag("--gaussianize", gauss, "Gaussianize the data first");
  tstat_cmd->add_option("--output", out_path, "Field container (otherwise CSV to stdout)");
  tstat_cmd->add_flag("--text", text, "Write the text container variant");
  add_format(tstat_cmd, format);

  // gaussianize -----------------------------------------------------------------
  auto* gauss_cmd = app.add_subcommand("gaussianize", "Gaussianize a sample container");
  int bins = 0;
  gauss_cmd->add_option("--input", in_path, "Sample container")->required();
  gauss_cmd->add_option("--output", out_path, "Output sample container");
  gauss_cmd->add_option("--hist", bins, "Print a histogram of the pooled null with this many bins");
  gauss_cmd->add_flag("--text", text, "Write the text container variant");
  add_format(gauss_cmd, format);

  // lkc -------------------------------------------------------------------------
  auto* lkc_cmd = app.add_subcommand("lkc", "Estimate Lipschitz-Killing curvatures");
  std::string method = "conv";
  int r_true = 21;
  lkc_cmd->add_option("--input", in_path, "Sample container (or a mask for --method true/fwhm)")->required();
  lkc_cmd->add_option("--fwhm", io.fwhm, "Kernel FWHM in voxels")->required();
  lkc_cmd->add_option("--method", method, "conv, kiebel, forman, fwhm or true")->capture_default_str();
  lkc_cmd->add_option("--resolution", r_grid, "Added resolution for conv")->capture_default_str();
  lkc_cmd->add_option("--r-true", r_true, "Added resolution for true")->capture_default_str();
  lkc_cmd->add_flag("--gaussianize", gauss, "Gaussianize the data first");
  add_format(lkc_cmd, format);

  // threshold -------------------------------------------------------------------
  auto* thr_cmd = app.add_subcommand("threshold", "FWER threshold from LKCs");
  std::vector<double> lkcs, alphas{0.05};
  double df = 0.0;
  bool gaussian_field = false;
  thr_cmd->add_option("--lkcs", lkcs, "L0,...,LD")->required()->delimiter(',');
  thr_cmd->add_option("--df", df, "t-field degrees of freedom (N - 1)");
  thr_cmd->add_flag("--gaussian", gaussian_field, "Gaussian field densities");
  thr_cmd->add_option("--alpha", alphas, "FWER levels")->delimiter(',');
  thr_cmd->add_option("--tails", tails, "one or two")->capture_default_str();
  add_format(thr_cmd, format);

  // eec -------------------------------------------------------------------------
  auto* eec_cmd = app.add_subcommand("eec", "Expected Euler characteristic curve");
  std::vector<double> us;
  double u_from = -2.0, u_to = 5.0, u_step = 0.1;
  eec_cmd->add_option("--lkcs", lkcs, "L0,...,LD")->required()->delimiter(',');
  eec_cmd->add_option("--df", df, "t-field degrees of freedom (N - 1)");
  eec_cmd->add_flag("--gaussian", gaussian_field, "Gaussian field densities");
  eec_cmd->add_option("--u", us, "Thresholds")->delimiter(',');
  eec_cmd->add_option("--from", u_from, "First threshold")->capture_default_str();
  eec_cmd->add_option("--to", u_to, "Last threshold")->capture_default_str();
  eec_cmd->add_option("--step", u_step, "Threshold step")->capture_default_str();
  add_format(eec_cmd, format);

  // eccurve ---------------------------------------------------------------------
  auto* ecc_cmd = app.add_subcommand("eccurve", "Euler characteristic curve of a field container");
  ecc_cmd->add_option("--input", in_path, "Field container")->required();
  ecc_cmd->add_option("--u", us, "Thresholds (default: from the field values)")->delimiter(',');
  add_format(ecc_cmd, format);

  // simulate --------------------------------------------------------------------
  auto* sim_cmd = app.add_subcommand("simulate", "Run the experiments of a config file");
  std::string config_path, out_dir = ".";
  std::uint64_t seed = 0;
  int workers = 0;
  bool quiet = false;
  sim_cmd->add_option("--config", config_path, "Experiment config")->required();
  auto* seed_opt = sim_cmd->add_option("--seed", seed, "Random seed (required)");
  sim_cmd->add_option("--out", out_dir, "Output directory")->capture_default_str();
  sim_cmd->add_option("--workers", workers, "Override the worker count");
  sim_cmd->add_flag("--quiet", quiet, "No progress lines");

  // bank ------------------------------------------------------------------------
  auto* bank_cmd = app.add_subcommand("bank", "Synthesise a contrast-map bank and resample it");
  std::vector<int> dims;
  std::vector<double> spacing;
  std::string mask_path, dist = "student-t", indices_path;
  int size = 7000, resample_n = 0, draws = 0;
  bool homogeneous = false;
  NoiseSpec gen;
  BankProfile profile;
  bank_cmd->add_option("--dims", dims, "Lattice dimensions of a solid mask")->delimiter(',');
  bank_cmd->add_option("--spacing", spacing, "Lattice spacing")->delimiter(',');
  bank_cmd->add_option("--mask", mask_path, "Mask container");
  bank_cmd->add_option("--size", size, "Number of images")->capture_default_str();
  auto* bank_seed = bank_cmd->add_option("--seed", seed, "Random seed")->required();
  (void)bank_seed;
  bank_cmd->add_option("--distribution", dist, "gaussian, student-t or laplace")->capture_default_str();
  bank_cmd->add_option("--df", gen.df, "student-t df (homogeneous bank)")->capture_default_str();
  bank_cmd->add_option("--scale", gen.scale, "laplace scale")->capture_default_str();
  bank_cmd->add_option("--df-min", profile.df_min, "Lowest df of the heterogeneous profile")
      ->capture_default_str();
  bank_cmd->add_option("--df-max", profile.df_max, "Highest df of the heterogeneous profile")
      ->capture_default_str();
  bank_cmd->add_flag("--homogeneous", homogeneous, "No spatial df or variance profile");
  bank_cmd->add_option("--output", out_path, "Sample container for the bank");
  bank_cmd->add_flag("--text", text, "Write the text container variant");
  bank_cmd->add_option("--resample", resample_n, "Subjects per resampled draw");
  bank_cmd->add_option("--draws", draws, "Number of resampled draws");
  bank_cmd->add_option("--indices", indices_path, "Write the resampled indices as CSV");

  CLI11_PARSE(app, argc, argv);

  try {
    if (infer_cmd->parsed()) {
      io.resolution = parse_resolution(res_str);
      io.alpha = alpha;
      io.tails = parse_tails(tails);
      io.gaussianize = gauss;
      const InferenceResult r = infer(read_sample(in_path), io);
      const int D = r.lkcs.dim;
      Table regions;
      regions.header = {"region", "sign", "points"};
      for (int d = 0; d < D; ++d) regions.header.push_back(std::string("peak_") + axis_name(d));
      regions.header.push_back("peak_t");
      for (const auto& g : r.regions) {
        std::vector<json> row{g.id, g.sign, g.points};
        for (int d = 0; d < D; ++d) row.push_back(g.peak[d]);
        row.push_back(g.peak_value);
        regions.rows.push_back(row);
      }
      if (format == "json") {
        json o;
        o["threshold"] = r.threshold;
        o["alpha"] = r.alpha;
        o["tails"] = to_string(r.tails);
        o["resolution"] = r.resolution == kResolutionInfinity ? "inf" : std::to_string(r.resolution);
        o["lkcs"] = r.lkcs.values;
        std::vector<double> loc(r.max_location.begin(), r.max_location.begin() + D);
        o["max_location"] = loc;
        o["max_t"] = r.max_value;
        o["rejected"] = r.rejected;
        json regs = json::array();
        for (const auto& g : r.regions) {
          regs.push_back({{"region", g.id},
                          {"sign", g.sign},
                          {"points", g.points},
                          {"peak", std::vector<double>(g.peak.begin(), g.peak.begin() + D)},
                          {"peak_t", g.peak_value}});
        }
        o["regions"] = regs;
        std::cout << o.dump(2) << '\n';
      } else {
        Table s;
        s.header = {"key", "value"};
        s.rows.push_back({"threshold", r.threshold});
        s.rows.push_back({"alpha", r.alpha});
        s.rows.push_back({"tails", to_string(r.tails)});
        s.rows.push_back({"resolution", res_str});
        for (int d = 0; d <= D; ++d) s.rows.push_back({"L" + std::to_string(d), r.lkcs.values[d]});
        for (int d = 0; d < D; ++d) s.rows.push_back({std::string("max_") + axis_name(d), r.max_location[d]});
        s.rows.push_back({"max_t", r.max_value});
        s.rows.push_back({"rejected", r.rejected});
        s.rows.push_back({"regions", static_cast<int>(r.regions.size())});
        s.print(std::cout, "csv");
      }
      if (!regions_path.empty()) {
        std::ofstream f(regions_path);
        if (!f) throw Error("cannot open for writing: " + regions_path);
        regions.print(f, "csv");
      }
      return 0;
    }

    if (tstat_cmd->parsed()) {
      if (r_grid < 0) throw Error("resolution must be non-negative");
      LatticeSample s = read_sample(in_path);
      if (gauss) s = gaussianize(s);
      const GaussianKernel k(io.fwhm, s.mask().spacing());
      const GridPtr grid = FineGrid::build(s.mask_ptr(), r_grid);
      const ScalarField T = t_field(fields_on_grid(s, k, grid, false, true));
      if (!out_path.empty()) {
        write_field(out_path, T, text);
        return 0;
      }
      Table t;
      const int D = grid->dim();
      for (int d = 0; d < D; ++d) t.header.push_back(axis_name(d));
      t.header.push_back("t");
      for (std::size_t i = 0; i < grid->size(); ++i) {
        std::vector<json> row;
        for (int d = 0; d < D; ++d) row.push_back(grid->point(i)[d]);
        row.push_back(T.values[i]);
        t.rows.push_back(row);
      }
      t.print(std::cout, format);
      return 0;
    }

    if (gauss_cmd->parsed()) {
      const LatticeSample s = read_sample(in_path);
      if (!out_path.empty()) write_sample(out_path, gaussianize(s), text);
      if (bins > 0) {
        Table t;
        t.header = {"lower", "upper", "count"};
        for (const auto& b : pooled_histogram(PooledNull::from_sample(s), bins)) {
          t.rows.push_back({b.lower, b.upper, static_cast<long long>(b.count)});
        }
        t.print(std::cout, format);
      }
      if (out_path.empty() && bins <= 0) throw Error("nothing to do: pass --output and/or --hist");
      return 0;
    }

    if (lkc_cmd->parsed()) {
      const LKCMethod m = parse_lkc_method(method);
      const Container c = read_container(in_path);
      const GaussianKernel k(io.fwhm, c.mask->spacing());
      LKCVector L;
      int N = 0;
      int r_used = 0;
      if (m == LKCMethod::truth) {
        L = true_lkcs(k, c.mask, r_true);
        r_used = r_true;
      } else if (m == LKCMethod::fwhm) {
        double hbar = 0.0;
        for (double h : c.mask->spacing()) hbar += h / c.mask->dim();
        L = lkcs_from_fwhm(io.fwhm * hbar, build_voxel_manifold(*c.mask));
      } else {
        if (!c.sample) throw Error(in_path + ": method " + method + " needs a sample container");
        LatticeSample s = *c.sample;
        N = s.subjects();
        if (gauss) s = gaussianize(s);
        if (m == LKCMethod::convolution) {
          r_used = r_grid;
          L = convolution_lkcs(fields_on_grid(s, k, FineGrid::build(s.mask_ptr(), r_grid), false, true));
        } else {
          const FieldSet f = fields_on_grid(s, k, FineGrid::build(s.mask_ptr(), 0), false, false);
          std::vector<double> v;
          for (int n = 0; n < f.subjects; ++n) {
            for (auto p : f.grid->voxel_points()) v.push_back(f.values[n * f.points() + p]);
          }
          L = lattice_lkcs(LatticeSample(s.mask_ptr(), N, std::move(v)), m);
        }
      }
      Table t;
      t.header = {"method", "N", "fwhm", "r"};
      std::vector<json> row{to_string(m), N, io.fwhm, r_used};
      for (int d = 0; d <= L.dim; ++d) {
        t.header.push_back("L" + std::to_string(d));
        row.push_back(jnum(L.values[d]));
      }
      t.rows.push_back(row);
      t.print(std::cout, format);
      return 0;
    }

    if (thr_cmd->parsed()) {
      const LKCVector L = parse_lkcs(lkcs);
      const ECDensityParams p = density(df, gaussian_field);
      const Tails tl = parse_tails(tails);
      Table t;
      t.header = {"alpha", "tails", "u"};
      for (double a : alphas) t.rows.push_back({a, to_string(tl), fwer_threshold(L, p, a, tl)});
      t.print(std::cout, format);
      return 0;
    }

    if (eec_cmd->parsed()) {
      const LKCVector L = parse_lkcs(lkcs);
      const ECDensityParams p = density(df, gaussian_field);
      if (us.empty()) {
        if (!(u_step > 0.0) || u_to < u_from) throw Error("need --from <= --to and --step > 0");
        const int n = static_cast<int>(std::floor((u_to - u_from) / u_step + 1e-9));
        for (int i = 0; i <= n; ++i) us.push_back(u_from + i * u_step);
      }
      Table t;
      t.header = {"u", "eec"};
      for (double u : us) t.rows.push_back({u, eec(L, p, u)});
      t.print(std::cout, format);
      return 0;
    }

    if (ecc_cmd->parsed()) {
      const ScalarField f = read_field(in_path);
      if (us.empty()) us = default_thresholds(f.values);
      const ECCurve c = ec_curve(f, us);
      Table t;
      t.header = {"u", "ec"};
      for (std::size_t i = 0; i < c.thresholds.size(); ++i) {
        t.rows.push_back({c.thresholds[i], static_cast<long long>(std::llround(c.values[i]))});
      }
      t.print(std::cout, format);
      return 0;
    }

    if (sim_cmd->parsed()) {
      if (seed_opt->count() == 0) throw Error("simulate needs an explicit --seed");
      ExperimentConfig cfg = load_experiment_config(Config::load(config_path));
      cfg.noise.seed = seed;
      if (workers > 0) cfg.workers = workers;
      const ProgressFn progress = [quiet](const std::string& msg) {
        if (!quiet) std::cerr << msg << '\n';
      };
      const SimulationOutcome out = run_experiments(cfg, out_dir, progress);
      for (const auto& f : out.files) std::cout << f << '\n';
      for (const auto& e : out.invariant_failures) std::cerr << "invariant failed: " << e << '\n';
      return out.invariant_failures.empty() ? 0 : 3;
    }

    if (bank_cmd->parsed()) {
      MaskPtr mask;
      if (!mask_path.empty()) {
        mask = std::make_shared<const Mask>(read_mask(mask_path));
      } else if (!dims.empty()) {
        mask = std::make_shared<const Mask>(Mask::solid(dims, spacing));
      } else {
        throw Error("bank needs --mask or --dims");
      }
      gen.distribution = parse_distribution(dist);
      gen.seed = seed;
      profile.heterogeneous = !homogeneous;
      if (!out_path.empty()) write_sample(out_path, make_synthetic_bank(size, mask, gen, profile, seed), text);
      if (resample_n > 0) {
        const Resampling rs = resample_bank(size, resample_n, draws, seed);
        if (!rs.warning.empty()) std::cerr << "warning: " << rs.warning << '\n';
        Table t;
        t.header = {"draw", "position", "index"};
        for (std::size_t j = 0; j < rs.indices.size(); ++j) {
          for (std::size_t i = 0; i < rs.indices[j].size(); ++i) {
            t.rows.push_back({static_cast<long long>(j), static_cast<long long>(i), rs.indices[j][i]});
          }
        }
        if (indices_path.empty()) {
          t.print(std::cout, "csv");
        } else {
          std::ofstream f(indices_path);
          if (!f) throw Error("cannot open for writing: " + indices_path);
          t.print(f, "csv");
        }
      }
      if (out_path.empty() && resample_n <= 0) throw Error("nothing to do: pass --output and/or --resample");
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
