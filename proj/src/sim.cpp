#include "rft/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <thread>

#include <boost/random/laplace_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/student_t_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include "rft/euler.hpp"
#include "rft/gaussianize.hpp"
#include "rft/io.hpp"
#include "rft/rng.hpp"

namespace rft {

namespace {

const std::set<std::string> kExperiments{"lkc", "fwer", "eec", "fwhm_bias"};

enum ExperimentTag : std::uint32_t { kTagFwer = 1, kTagLkc = 2, kTagEec = 3, kTagFwhm = 4, kTagBank = 5, kTagResample = 6 };

std::uint32_t stream_tag(ExperimentTag e, int setting) {
  return (static_cast<std::uint32_t>(e) << 24) | (static_cast<std::uint32_t>(setting) & 0xFFFFFFu);
}

bool contains(const std::vector<int>& v, int x) { return std::find(v.begin(), v.end(), x) != v.end(); }

}  // namespace

void ExperimentConfig::validate() const {
  if (experiments.empty()) throw Error("experiment list is empty");
  for (const auto& e : experiments) {
    if (!kExperiments.count(e)) throw Error("unknown experiment: " + e);
  }
  if (!mask) throw Error("experiment has no mask");
  if (subjects.empty() || fwhm.empty() || resolutions.empty() || alpha.empty() || gaussianize.empty()) {
    throw Error("experiment lists must be non-empty");
  }
  if (replicates < 1) throw Error("replicates must be at least 1");
  if (workers < 1) throw Error("workers must be at least 1");
  for (int n : subjects) {
    if (n < 4) throw Error("subjects must be at least 4");
  }
  for (double f : fwhm) {
    if (!(f > 0.0) || !std::isfinite(f)) throw Error("fwhm values must be positive");
  }
  for (int r : resolutions) {
    if (r != 0 && r != 1 && r != kResolutionInfinity) throw Error("resolutions must be drawn from 0, 1, inf");
  }
  for (double a : alpha) {
    if (!(a > 0.0 && a < 1.0)) throw Error("alpha values must lie in (0, 1)");
  }
  if (r_estimate < 0 || r_true < 0) throw Error("added resolution must be non-negative");
  if (slice_kernel_3d && mask->dim() != 2) throw Error("slice_kernel_3d needs a 2D mask");
  for (std::size_t i = 1; i < thresholds.size(); ++i) {
    if (!(thresholds[i] > thresholds[i - 1])) throw Error("thresholds must be strictly ascending");
  }
  if (source != "noise" && source != "bank") throw Error("source must be 'noise' or 'bank'");
  if (source == "bank") {
    for (int n : subjects) {
      if (n > bank_size) throw Error("bank size smaller than the subject count");
    }
  }
  noise.validate();
}

int ExperimentConfig::padding_for(const std::string& experiment, double f) const {
  int p = noise.padding;
  if (!padding_set) p = (experiment == "eec" || experiment == "fwhm_bias") ? -1 : 0;
  if (p >= 0) return p;
  return static_cast<int>(std::ceil(4.0 * fwhm_to_sigma(f)));
}

ExperimentConfig load_experiment_config(const Config& cfg) {
  cfg.check_known({
      {"", {"experiments"}},
      {"mask", {"dims", "spacing", "shape", "file"}},
      {"noise", {"distribution", "df", "scale", "padding"}},
      {"run",
       {"subjects", "fwhm", "resolutions", "replicates", "alpha", "tails", "gaussianize", "workers", "r_estimate",
        "r_true", "slice_kernel_3d", "source"}},
      {"eec", {"thresholds", "threshold_min", "threshold_max", "threshold_step"}},
      {"bank", {"size", "heterogeneous", "df_min", "df_max", "sd_min", "sd_max"}},
  });
  ExperimentConfig c;
  c.experiments = cfg.get_list("", "experiments", {});
  if (c.experiments.empty()) {
    if (cfg.has("", "experiments")) cfg.fail("", "experiments", "experiment list is empty");
    throw Error(cfg.source() + ": experiment list is empty");
  }
  for (const auto& e : c.experiments) {
    if (!kExperiments.count(e)) cfg.fail("", "experiments", "unknown experiment '" + e + "'");
  }

  const std::string shape = cfg.get("mask", "shape", "solid");
  if (shape == "file") {
    std::filesystem::path p = cfg.get("mask", "file", "");
    if (p.empty()) cfg.fail("mask", "file", "missing mask file");
    if (p.is_relative()) p = std::filesystem::path(cfg.source()).parent_path() / p;
    c.mask = std::make_shared<const Mask>(read_mask(p.string()));
  } else if (shape == "solid") {
    const auto dims = cfg.get_ints("mask", "dims", {});
    if (dims.empty()) throw Error(cfg.source() + ": [mask] dims is required");
    auto spacing = cfg.get_doubles("mask", "spacing", {});
    try {
      c.mask = std::make_shared<const Mask>(Mask::solid(dims, spacing));
    } catch (const Error& e) {
      cfg.fail("mask", "dims", e.what());
    }
  } else {
    cfg.fail("mask", "shape", "expected 'solid' or 'file'");
  }

  try {
    c.noise.distribution = parse_distribution(cfg.get("noise", "distribution", "gaussian"));
  } catch (const Error& e) {
    cfg.fail("noise", "distribution", e.what());
  }
  c.noise.df = cfg.get_double("noise", "df", 3.0);
  c.noise.scale = cfg.get_double("noise", "scale", 1.0);
  if (cfg.has("noise", "padding")) {
    c.padding_set = true;
    const std::string p = cfg.get("noise", "padding", "auto");
    c.noise.padding = (p == "auto") ? -1 : cfg.get_int("noise", "padding", 0);
    if (c.noise.padding < -1) cfg.fail("noise", "padding", "expected 'auto' or a non-negative integer");
  }

  c.subjects = cfg.get_ints("run", "subjects", c.subjects);
  c.fwhm = cfg.get_doubles("run", "fwhm", c.fwhm);
  if (cfg.has("run", "resolutions")) {
    c.resolutions.clear();
    for (const auto& s : cfg.get_list("run", "resolutions", {})) {
      if (s == "inf" || s == "infinity") {
        c.resolutions.push_back(kResolutionInfinity);
      } else if (s == "0" || s == "1") {
        c.resolutions.push_back(std::stoi(s));
      } else {
        cfg.fail("run", "resolutions", "expected values from 0, 1, inf");
      }
    }
  }
  c.replicates = cfg.get_int("run", "replicates", c.replicates);
  c.alpha = cfg.get_doubles("run", "alpha", c.alpha);
  try {
    c.tails = parse_tails(cfg.get("run", "tails", "two"));
  } catch (const Error& e) {
    cfg.fail("run", "tails", e.what());
  }
  if (cfg.has("run", "gaussianize")) {
    c.gaussianize.clear();
    for (const auto& s : cfg.get_list("run", "gaussianize", {})) {
      if (s == "true" || s == "yes" || s == "1") {
        c.gaussianize.push_back(true);
      } else if (s == "false" || s == "no" || s == "0") {
        c.gaussianize.push_back(false);
      } else {
        cfg.fail("run", "gaussianize", "expected booleans");
      }
    }
  }
  c.workers = cfg.get_int("run", "workers", c.workers);
  c.r_estimate = cfg.get_int("run", "r_estimate", c.r_estimate);
  c.r_true = cfg.get_int("run", "r_true", c.r_true);
  c.slice_kernel_3d = cfg.get_bool("run", "slice_kernel_3d", false);
  c.source = cfg.get("run", "source", "noise");

  if (cfg.has("eec", "thresholds")) {
    c.thresholds = cfg.get_doubles("eec", "thresholds", {});
  } else {
    const double lo = cfg.get_double("eec", "threshold_min", -2.0);
    const double hi = cfg.get_double("eec", "threshold_max", 5.0);
    const double step = cfg.get_double("eec", "threshold_step", 0.1);
    if (!(step > 0.0) || !(hi > lo)) cfg.fail("eec", "threshold_step", "need threshold_min < threshold_max, step > 0");
    const int n = static_cast<int>(std::floor((hi - lo) / step + 1e-9));
    for (int i = 0; i <= n; ++i) c.thresholds.push_back(lo + i * step);
  }

  c.bank_size = cfg.get_int("bank", "size", c.bank_size);
  c.bank.heterogeneous = cfg.get_bool("bank", "heterogeneous", c.bank.heterogeneous);
  c.bank.df_min = cfg.get_double("bank", "df_min", c.bank.df_min);
  c.bank.df_max = cfg.get_double("bank", "df_max", c.bank.df_max);
  c.bank.sd_min = cfg.get_double("bank", "sd_min", c.bank.sd_min);
  c.bank.sd_max = cfg.get_double("bank", "sd_max", c.bank.sd_max);
  return c;
}

void parallel_for(int count, int workers, const std::function<void(int)>& fn) {
  if (count <= 0) return;
  workers = std::max(1, std::min(workers, count));
  std::atomic<int> next{0};
  std::mutex mu;
  int failed_at = count;
  std::exception_ptr failure;
  auto body = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (i < failed_at) {
          failed_at = i;
          failure = std::current_exception();
        }
      }
    }
  };
  if (workers == 1) {
    body();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
}

namespace {

struct Domain {
  MaskPtr data;  // where noise lives
  MaskPtr crop;  // where inference happens; same lattice as data
};

Domain make_domain(const MaskPtr& mask, int padding) {
  if (padding <= 0) return {mask, mask};
  return {std::make_shared<const Mask>(mask->padded(padding)), std::make_shared<const Mask>(mask->embedded(padding))};
}

struct SettingKey {
  int subjects;
  double fwhm;
  int index;
};

std::vector<SettingKey> settings_of(const ExperimentConfig& c) {
  std::vector<SettingKey> out;
  int i = 0;
  for (int n : c.subjects) {
    for (double f : c.fwhm) out.push_back({n, f, i++});
  }
  return out;
}

// Draws the lattice data of one replicate: fresh noise or a bank resample.
class SampleSource {
 public:
  SampleSource(const ExperimentConfig& c, ExperimentTag tag, const MaskPtr& data_mask) : c_(c), tag_(tag), mask_(data_mask) {
    if (c.source == "bank") {
      bank_ = std::make_unique<LatticeSample>(
          make_synthetic_bank(c.bank_size, data_mask, c.noise, c.bank, c.noise.seed));
    }
  }

  LatticeSample draw(const SettingKey& s, int replicate) const {
    const std::uint32_t tag = stream_tag(tag_, s.index);
    LatticeSample out = bank_ ? bank_->subset(resample_one(s, replicate))
                              : generate_noise(mask_, c_.noise, s.subjects, static_cast<std::uint32_t>(replicate), tag);
    if (c_.slice_kernel_3d) {
      // Only the slice's own plane lies inside a 3D kernel's support when the
      // slice is embedded in a one-voxel-thick volume, so the third axis
      // contributes the constant factor K_z(0).
      const double kz = 1.0 / (std::sqrt(2.0 * M_PI) * fwhm_to_sigma(s.fwhm));
      std::vector<double> d = out.data();
      for (double& x : d) x *= kz;
      return LatticeSample(out.mask_ptr(), out.subjects(), std::move(d));
    }
    return out;
  }

 private:
  std::vector<int> resample_one(const SettingKey& s, int replicate) const {
    Philox4x32 gen = make_stream(c_.noise.seed, stream_tag(kTagResample, s.index) ^ (tag_ << 20),
                                 static_cast<std::uint32_t>(replicate), 0);
    boost::random::uniform_int_distribution<int> pick(0, bank_->subjects() - 1);
    std::vector<int> idx(s.subjects);
    for (int& i : idx) i = pick(gen);
    return idx;
  }

  const ExperimentConfig& c_;
  ExperimentTag tag_;
  MaskPtr mask_;
  std::unique_ptr<LatticeSample> bank_;
};

double stat_of(double t, Tails tails) { return tails == Tails::two ? std::abs(t) : t; }

FWERReplicate fwer_replicate(const LatticeSample& s, const GaussianKernel& k, const GridPtr& grid,
                             const ExperimentConfig& c, bool need_inf) {
  FWERReplicate out;
  const FieldSet fields = fields_on_grid(s, k, grid, false, true);
  const ScalarField T = t_field(fields);
  const LKCVector L = lkcs_from_lambda(lambda_hat(fields), *grid, LKCMethod::convolution);
  const ECDensityParams p = ECDensityParams::t_field(s.subjects() - 1);
  for (double a : c.alpha) out.thresholds.push_back(fwer_threshold(L, p, a, c.tails));

  out.sup0 = -std::numeric_limits<double>::infinity();
  for (std::int64_t i : grid->voxel_points()) out.sup0 = std::max(out.sup0, stat_of(T.values[i], c.tails));
  out.sup1 = out.sup0;
  for (double t : T.values) out.sup1 = std::max(out.sup1, stat_of(t, c.tails));
  out.sup_inf = out.sup1;
  const double u_max = *std::max_element(out.thresholds.begin(), out.thresholds.end());
  if (need_inf && out.sup1 <= u_max) {
    // The continuous supremum only matters when it can still change a decision.
    const PointEvaluator pe(s, k);
    const TFieldEvaluator te(pe);
    const double s_inf = c.tails == Tails::two ? supremum_abs(te.as_function(), *grid, T.values)
                                               : find_field_maximum(te.as_function(), *grid, T.values).value;
    out.sup_inf = std::max(out.sup1, s_inf);
  }

  const auto up = discrete_local_maxima(*grid, T.values);
  std::vector<std::int64_t> down;
  if (c.tails == Tails::two) {
    std::vector<double> neg(T.values.size());
    std::transform(T.values.begin(), T.values.end(), neg.begin(), [](double v) { return -v; });
    down = discrete_local_maxima(*grid, neg);
  }
  for (double u : out.thresholds) {
    int m = 0;
    for (auto i : up) m += T.values[i] > u ? 1 : 0;
    for (auto i : down) m += -T.values[i] > u ? 1 : 0;
    out.maxima.push_back(m);
  }
  out.ok = true;
  return out;
}

double sup_at(const FWERReplicate& r, int resolution) {
  if (resolution == 0) return r.sup0;
  if (resolution == 1) return r.sup1;
  return r.sup_inf;
}

std::string setting_label(int n, double f, bool g) {
  std::ostringstream os;
  os << "N=" << n << " fwhm=" << f << (g ? " gaussianized" : " raw");
  return os.str();
}

}  // namespace

FWERReport run_fwer_experiment(const ExperimentConfig& c, const ProgressFn& progress) {
  c.validate();
  FWERReport report;
  const bool need_inf = contains(c.resolutions, kResolutionInfinity);
  const int G = static_cast<int>(c.gaussianize.size());
  for (const SettingKey& s : settings_of(c)) {
    const Domain dom = make_domain(c.mask, c.padding_for("fwer", s.fwhm));
    const GridPtr grid = FineGrid::build(dom.crop, 1);
    const GaussianKernel k(s.fwhm, dom.data->spacing());
    const SampleSource source(c, kTagFwer, dom.data);
    std::vector<std::vector<FWERReplicate>> reps(G, std::vector<FWERReplicate>(c.replicates));
    parallel_for(c.replicates, c.workers, [&](int j) {
      const LatticeSample raw = source.draw(s, j);
      for (int g = 0; g < G; ++g) {
        try {
          if (c.gaussianize[g]) {
            reps[g][j] = fwer_replicate(gaussianize(raw), k, grid, c, need_inf);
          } else {
            reps[g][j] = fwer_replicate(raw, k, grid, c, need_inf);
          }
        } catch (const Error& e) {
          reps[g][j].ok = false;
          reps[g][j].error = e.what();
        }
      }
    });
    for (int g = 0; g < G; ++g) {
      const auto& rs = reps[g];
      int ok = 0;
      for (const auto& r : rs) ok += r.ok ? 1 : 0;
      const int failures = c.replicates - ok;
      if (failures * 1000 > c.replicates) {
        report.invariant_failures.push_back(setting_label(s.subjects, s.fwhm, c.gaussianize[g]) + ": " +
                                            std::to_string(failures) + " failed replicates (first: " +
                                            [&] {
                                              for (const auto& r : rs)
                                                if (!r.ok) return r.error;
                                              return std::string();
                                            }() +
                                            ")");
      }
      for (std::size_t a = 0; a < c.alpha.size(); ++a) {
        for (const auto& r : rs) {
          if (!r.ok) continue;
          const double u = r.thresholds[a];
          const bool d0 = r.sup0 > u, d1 = r.sup1 > u, di = r.sup_inf > u;
          if ((d0 && !d1) || (d1 && !di)) ++report.nesting_violations;
        }
        for (int res : c.resolutions) {
          FWERRow row;
          row.subjects = s.subjects;
          row.fwhm = s.fwhm;
          row.gaussianized = c.gaussianize[g];
          row.alpha = c.alpha[a];
          row.resolution = res;
          row.failures = failures;
          double maxima = 0.0, thr = 0.0;
          for (const auto& r : rs) {
            if (!r.ok) continue;
            ++row.replicates;
            row.rejections += sup_at(r, res) > r.thresholds[a] ? 1 : 0;
            maxima += r.maxima[a];
            thr += r.thresholds[a];
          }
          if (row.replicates > 0) {
            const double J = row.replicates;
            row.fwer = row.rejections / J;
            row.se = std::sqrt(row.fwer * (1.0 - row.fwer) / J);
            row.ci_low = row.fwer - 1.96 * row.se;
            row.ci_high = row.fwer + 1.96 * row.se;
            row.mean_maxima = maxima / J;
            row.mean_threshold = thr / J;
          }
          if (!(row.fwer >= 0.0 && row.fwer <= 1.0)) {
            report.invariant_failures.push_back("FWER outside [0, 1]");
          }
          report.rows.push_back(row);
        }
      }
      report.settings.push_back({s.subjects, s.fwhm, static_cast<bool>(c.gaussianize[g]), rs});
    }
    if (progress) progress("fwer " + setting_label(s.subjects, s.fwhm, false).substr(0) + " done");
  }
  if (report.nesting_violations > 0) {
    report.invariant_failures.push_back("resolution nesting violated in " + std::to_string(report.nesting_violations) +
                                        " replicate decisions");
  }
  return report;
}

LKCReport run_lkc_experiment(const ExperimentConfig& c, const ProgressFn& progress) {
  c.validate();
  LKCReport report;
  const int G = static_cast<int>(c.gaussianize.size());
  const int D = c.mask->dim();
  for (const SettingKey& s : settings_of(c)) {
    const Domain dom = make_domain(c.mask, c.padding_for("lkc", s.fwhm));
    const GaussianKernel k(s.fwhm, dom.data->spacing());
    const LKCVector truth = true_lkcs(k, dom.data, dom.crop, c.r_true);
    const GridPtr grid = FineGrid::build(dom.crop, c.r_estimate);
    const SampleSource source(c, kTagLkc, dom.data);
    // [g][j] -> estimates L_1..L_D (empty on failure)
    std::vector<std::vector<std::vector<double>>> est(G, std::vector<std::vector<double>>(c.replicates));
    parallel_for(c.replicates, c.workers, [&](int j) {
      const LatticeSample raw = source.draw(s, j);
      for (int g = 0; g < G; ++g) {
        try {
          const FieldSet f = fields_on_grid(raw, k, grid, c.gaussianize[g], true);
          const LKCVector L = convolution_lkcs(f);
          est[g][j].assign(L.values.begin() + 1, L.values.end());
        } catch (const Error&) {
          est[g][j].clear();
        }
      }
    });
    for (int g = 0; g < G; ++g) {
      int failures = 0;
      std::vector<std::vector<double>> biases(D + 1);
      for (int j = 0; j < c.replicates; ++j) {
        if (est[g][j].empty()) {
          ++failures;
          continue;
        }
        for (int d = 1; d <= D; ++d) {
          const double e = est[g][j][d - 1];
          const double rb = (e - truth.values[d]) / truth.values[d];
          report.rows.push_back({s.subjects, s.fwhm, static_cast<bool>(c.gaussianize[g]), j, d, e, truth.values[d], rb});
          biases[d].push_back(rb);
          if (!std::isfinite(e)) report.invariant_failures.push_back("non-finite LKC estimate");
        }
      }
      if (failures * 1000 > c.replicates) {
        report.invariant_failures.push_back(setting_label(s.subjects, s.fwhm, c.gaussianize[g]) + ": " +
                                            std::to_string(failures) + " failed replicates");
      }
      for (int d = 1; d <= D; ++d) {
        auto b = biases[d];
        if (b.empty()) continue;
        std::sort(b.begin(), b.end());
        const std::size_t m = b.size();
        const double median = (m % 2) ? b[m / 2] : 0.5 * (b[m / 2 - 1] + b[m / 2]);
        double mean = 0.0;
        for (double x : b) mean += x;
        mean /= static_cast<double>(m);
        report.summary.push_back({s.subjects, s.fwhm, static_cast<bool>(c.gaussianize[g]), d, truth.values[d], median,
                                  mean, static_cast<int>(m)});
      }
    }
    for (int d = 1; d <= D; ++d) {
      if (!(truth.values[d] > 0.0) || !std::isfinite(truth.values[d])) {
        report.invariant_failures.push_back("true LKC is not positive");
      }
    }
    if (progress) progress("lkc N=" + std::to_string(s.subjects) + " fwhm=" + std::to_string(s.fwhm) + " done");
  }
  return report;
}

namespace {

double mean_spacing(const std::vector<double>& h) {
  double s = 0.0;
  for (double x : h) s += x;
  return s / static_cast<double>(h.size());
}

LatticeSample voxel_values(const FieldSet& f, const MaskPtr& crop) {
  const FineGrid& grid = *f.grid;
  const std::size_t P = grid.size();
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(f.subjects) * crop->voxel_count());
  for (int n = 0; n < f.subjects; ++n) {
    for (std::int64_t p : grid.voxel_points()) v.push_back(f.values[n * P + p]);
  }
  return LatticeSample(crop, f.subjects, std::move(v));
}

}  // namespace

EECReport run_eec_experiment(const ExperimentConfig& c, const ProgressFn& progress) {
  c.validate();
  if (c.thresholds.empty()) throw Error("eec experiment needs thresholds");
  EECReport report;
  const int G = static_cast<int>(c.gaussianize.size());
  const std::size_t U = c.thresholds.size();
  for (const SettingKey& s : settings_of(c)) {
    const Domain dom = make_domain(c.mask, c.padding_for("eec", s.fwhm));
    const GaussianKernel k(s.fwhm, dom.data->spacing());
    const LKCVector truth = true_lkcs(k, dom.data, dom.crop, c.r_true);
    const GridPtr grid = FineGrid::build(dom.crop, c.r_estimate);
    const VoxelManifoldSummary summary = build_voxel_manifold(*dom.crop);
    const SampleSource source(c, kTagEec, dom.data);
    struct Rep {
      bool ok = false;
      std::vector<double> curve;
      LKCVector conv, kiebel, forman;
      bool forman_ok = false;
    };
    std::vector<std::vector<Rep>> reps(G, std::vector<Rep>(c.replicates));
    parallel_for(c.replicates, c.workers, [&](int j) {
      const LatticeSample raw = source.draw(s, j);
      for (int g = 0; g < G; ++g) {
        Rep& r = reps[g][j];
        try {
          const FieldSet f = fields_on_grid(raw, k, grid, c.gaussianize[g], true);
          const ScalarField T = t_field(f);
          r.curve = ec_curve(*grid, T.values, c.thresholds).values;
          r.conv = convolution_lkcs(f);
          const LatticeSample lat = voxel_values(f, dom.crop);
          r.kiebel = lkcs_from_fwhm(lattice_fwhm(lat, LKCMethod::kiebel), summary);
          try {
            r.forman = lkcs_from_fwhm(lattice_fwhm(lat, LKCMethod::forman), summary);
            r.forman_ok = true;
          } catch (const Error&) {
            r.forman_ok = false;
          }
          r.ok = true;
        } catch (const Error&) {
          r.ok = false;
        }
      }
    });
    const ECDensityParams p = ECDensityParams::t_field(s.subjects - 1);
    for (int g = 0; g < G; ++g) {
      std::vector<ECCurve> curves;
      const int D = c.mask->dim();
      std::vector<double> conv(D + 1, 0.0), kiebel(D + 1, 0.0), forman(D + 1, 0.0);
      int forman_n = 0, failures = 0;
      for (const Rep& r : reps[g]) {
        if (!r.ok) {
          ++failures;
          continue;
        }
        curves.push_back({c.thresholds, r.curve, {}});
        for (int d = 0; d <= D; ++d) {
          conv[d] += r.conv.values[d];
          kiebel[d] += r.kiebel.values[d];
          if (r.forman_ok) forman[d] += r.forman.values[d];
        }
        forman_n += r.forman_ok ? 1 : 0;
      }
      if (failures * 1000 > c.replicates) {
        report.invariant_failures.push_back(setting_label(s.subjects, s.fwhm, c.gaussianize[g]) + ": " +
                                            std::to_string(failures) + " failed replicates");
      }
      if (curves.empty()) continue;
      const double J = static_cast<double>(curves.size());
      EECReport::MeanLKC m;
      m.subjects = s.subjects;
      m.fwhm = s.fwhm;
      m.gaussianized = c.gaussianize[g];
      m.conv = {D, conv, LKCMethod::convolution};
      m.kiebel = {D, kiebel, LKCMethod::kiebel};
      m.forman = {D, forman, LKCMethod::forman};
      for (int d = 0; d <= D; ++d) {
        m.conv.values[d] /= J;
        m.kiebel.values[d] /= J;
        m.forman.values[d] = forman_n > 0 ? m.forman.values[d] / forman_n : std::nan("");
      }
      m.truth = truth;
      const ECCurve mean = average_ec_curves(curves);
      for (std::size_t i = 0; i < U; ++i) {
        const double u = c.thresholds[i];
        report.rows.push_back({s.subjects, s.fwhm, m.gaussianized, u, mean.values[i], mean.se[i], eec(m.conv, p, u),
                               eec(m.kiebel, p, u), forman_n > 0 ? eec(m.forman, p, u) : std::nan(""),
                               eec(truth, p, u)});
      }
      report.lkcs.push_back(m);
    }
    if (progress) progress("eec N=" + std::to_string(s.subjects) + " fwhm=" + std::to_string(s.fwhm) + " done");
  }
  return report;
}

FWHMBiasReport run_fwhm_bias_experiment(const ExperimentConfig& c, const ProgressFn& progress) {
  c.validate();
  FWHMBiasReport report;
  for (const SettingKey& s : settings_of(c)) {
    const Domain dom = make_domain(c.mask, c.padding_for("fwhm_bias", s.fwhm));
    const GaussianKernel k(s.fwhm, dom.data->spacing());
    const GridPtr grid = FineGrid::build(dom.crop, 0);
    const SampleSource source(c, kTagFwhm, dom.data);
    const auto& h = dom.crop->spacing();
    const double hbar = mean_spacing(h);
    struct Rep {
      bool ok = false;
      double kiebel = 0.0, forman = 0.0, conv = 0.0;
    };
    std::vector<Rep> reps(c.replicates);
    parallel_for(c.replicates, c.workers, [&](int j) {
      Rep& r = reps[j];
      try {
        const LatticeSample raw = source.draw(s, j);
        const FieldSet f = fields_on_grid(raw, k, grid, false, true);
        const LatticeSample lat = voxel_values(f, dom.crop);
        r.kiebel = lattice_fwhm(lat, LKCMethod::kiebel) / hbar;
        r.forman = lattice_fwhm(lat, LKCMethod::forman) / hbar;
        r.conv = fwhm_convolution(residual_fields(f)) / hbar;
        r.ok = true;
      } catch (const Error&) {
        r.ok = false;
      }
    });
    FWHMBiasRow row{s.subjects, s.fwhm, 0, 0, 0, 0, 0, 0, 0};
    std::vector<double> kb, fb, cb;
    for (const Rep& r : reps) {
      if (!r.ok) continue;
      kb.push_back(r.kiebel - s.fwhm);
      fb.push_back(r.forman - s.fwhm);
      cb.push_back(r.conv - s.fwhm);
    }
    row.replicates = static_cast<int>(kb.size());
    auto mean_sd = [](const std::vector<double>& v, double& mean, double& sd) {
      mean = 0.0;
      sd = 0.0;
      if (v.empty()) return;
      for (double x : v) mean += x;
      mean /= static_cast<double>(v.size());
      if (v.size() < 2) return;
      for (double x : v) sd += (x - mean) * (x - mean);
      sd = std::sqrt(sd / static_cast<double>(v.size() - 1));
    };
    mean_sd(kb, row.kiebel_bias, row.kiebel_sd);
    mean_sd(fb, row.forman_bias, row.forman_sd);
    mean_sd(cb, row.conv_bias, row.conv_sd);
    const int failures = c.replicates - row.replicates;
    if (failures * 1000 > c.replicates) {
      report.invariant_failures.push_back("fwhm_bias fwhm=" + std::to_string(s.fwhm) + ": " +
                                          std::to_string(failures) + " failed replicates");
    }
    report.rows.push_back(row);
    if (progress) progress("fwhm_bias N=" + std::to_string(s.subjects) + " fwhm=" + std::to_string(s.fwhm) + " done");
  }
  return report;
}

LatticeSample make_synthetic_bank(int n_total, const MaskPtr& mask, const NoiseSpec& gen, const BankProfile& profile,
                                  std::uint64_t seed) {
  if (n_total < 2) throw Error("bank needs at least two images");
  gen.validate();
  const Mask& m = *mask;
  const int D = m.dim();
  const std::int64_t V = m.voxel_count();
  std::vector<double> df(V, gen.df), sd(V, 1.0);
  for (std::int64_t v = 0; v < V; ++v) {
    const Index idx = m.unravel(m.voxels()[v]);
    if (!profile.heterogeneous) continue;
    const int n0 = m.dims()[0];
    const int nl = m.dims()[D - 1];
    const double x0 = n0 > 1 ? static_cast<double>(idx[0]) / (n0 - 1) : 0.0;
    const double xl = nl > 1 ? static_cast<double>(idx[D - 1]) / (nl - 1) : 0.0;
    df[v] = profile.df_min + (profile.df_max - profile.df_min) * x0;
    sd[v] = profile.sd_min + (profile.sd_max - profile.sd_min) * xl;
  }
  std::vector<double> data(static_cast<std::size_t>(n_total) * V);
  for (int n = 0; n < n_total; ++n) {
    Philox4x32 g = make_stream(seed, stream_tag(kTagBank, 0), 0, static_cast<std::uint32_t>(n));
    double* row = data.data() + static_cast<std::int64_t>(n) * V;
    switch (gen.distribution) {
      case Distribution::gaussian: {
        boost::random::normal_distribution<double> dist;
        for (std::int64_t v = 0; v < V; ++v) row[v] = sd[v] * dist(g);
        break;
      }
      case Distribution::student_t: {
        boost::random::student_t_distribution<double> dist;
        for (std::int64_t v = 0; v < V; ++v) {
          const double x = dist(g, boost::random::student_t_distribution<double>::param_type(df[v]));
          row[v] = sd[v] * x * std::sqrt((df[v] - 2.0) / df[v]);
        }
        break;
      }
      case Distribution::laplace: {
        boost::random::laplace_distribution<double> dist(0.0, 1.0 / std::sqrt(2.0));
        for (std::int64_t v = 0; v < V; ++v) row[v] = sd[v] * dist(g);
        break;
      }
    }
  }
  return LatticeSample(mask, n_total, std::move(data));
}

Resampling resample_bank(int n_total, int subjects, int draws, std::uint64_t seed, std::uint32_t tag) {
  if (subjects < 1 || draws < 0) throw Error("resampling needs positive sizes");
  if (subjects > n_total) throw Error("bank size smaller than the subject count");
  Resampling out;
  if (static_cast<double>(subjects) / n_total > 0.05) {
    out.warning = "N / bank size = " + std::to_string(static_cast<double>(subjects) / n_total) +
                  " > 0.05: resampled subsets will overlap often";
  }
  boost::random::uniform_int_distribution<int> pick(0, n_total - 1);
  out.indices.resize(draws);
  for (int j = 0; j < draws; ++j) {
    Philox4x32 g = make_stream(seed, stream_tag(kTagResample, 0) ^ tag, static_cast<std::uint32_t>(j), 0);
    out.indices[j].resize(subjects);
    for (int& i : out.indices[j]) i = pick(g);
  }
  return out;
}

namespace {

std::ofstream open_csv(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open for writing: " + path);
  out << std::setprecision(10);
  return out;
}

std::string res_name(int r) { return r == kResolutionInfinity ? "inf" : std::to_string(r); }

}  // namespace

void write_fwer_csv(const std::string& path, const FWERReport& r) {
  auto out = open_csv(path);
  out << "subjects,fwhm,gaussianized,alpha,resolution,replicates,rejections,fwer,se,ci_low,ci_high,mean_maxima,"
         "mean_threshold,failures\n";
  for (const auto& w : r.rows) {
    out << w.subjects << ',' << w.fwhm << ',' << (w.gaussianized ? 1 : 0) << ',' << w.alpha << ','
        << res_name(w.resolution) << ',' << w.replicates << ',' << w.rejections << ',' << w.fwer << ',' << w.se
        << ',' << w.ci_low << ',' << w.ci_high << ',' << w.mean_maxima << ',' << w.mean_threshold << ','
        << w.failures << '\n';
  }
}

void write_lkc_csv(const std::string& path, const LKCReport& r) {
  auto out = open_csv(path);
  out << "subjects,fwhm,gaussianized,replicate,d,estimate,truth,rel_bias\n";
  for (const auto& w : r.rows) {
    out << w.subjects << ',' << w.fwhm << ',' << (w.gaussianized ? 1 : 0) << ',' << w.replicate << ',' << w.d << ','
        << w.estimate << ',' << w.truth << ',' << w.rel_bias << '\n';
  }
}

void write_lkc_summary_csv(const std::string& path, const LKCReport& r) {
  auto out = open_csv(path);
  out << "subjects,fwhm,gaussianized,d,truth,median_rel_bias,mean_rel_bias,replicates\n";
  for (const auto& w : r.summary) {
    out << w.subjects << ',' << w.fwhm << ',' << (w.gaussianized ? 1 : 0) << ',' << w.d << ',' << w.truth << ','
        << w.median_rel_bias << ',' << w.mean_rel_bias << ',' << w.replicates << '\n';
  }
}

void write_eec_csv(const std::string& path, const EECReport& r) {
  auto out = open_csv(path);
  out << "subjects,fwhm,gaussianized,u,empirical,se,eec_conv,eec_kiebel,eec_forman,eec_true\n";
  for (const auto& w : r.rows) {
    out << w.subjects << ',' << w.fwhm << ',' << (w.gaussianized ? 1 : 0) << ',' << w.u << ',' << w.empirical << ','
        << w.se << ',' << w.conv << ',' << w.kiebel << ',' << w.forman << ',' << w.truth << '\n';
  }
}

void write_fwhm_bias_csv(const std::string& path, const FWHMBiasReport& r) {
  auto out = open_csv(path);
  out << "subjects,fwhm,replicates,kiebel_bias,kiebel_sd,forman_bias,forman_sd,conv_bias,conv_sd\n";
  for (const auto& w : r.rows) {
    out << w.subjects << ',' << w.fwhm << ',' << w.replicates << ',' << w.kiebel_bias << ',' << w.kiebel_sd << ','
        << w.forman_bias << ',' << w.forman_sd << ',' << w.conv_bias << ',' << w.conv_sd << '\n';
  }
}

SimulationOutcome run_experiments(const ExperimentConfig& c, const std::string& out_dir, const ProgressFn& progress) {
  c.validate();
  std::filesystem::create_directories(out_dir);
  SimulationOutcome out;
  auto file = [&](const std::string& name) {
    const std::string p = (std::filesystem::path(out_dir) / name).string();
    out.files.push_back(p);
    return p;
  };
  auto collect = [&](const std::vector<std::string>& f) {
    out.invariant_failures.insert(out.invariant_failures.end(), f.begin(), f.end());
  };
  for (const auto& e : c.experiments) {
    if (e == "fwer") {
      const FWERReport r = run_fwer_experiment(c, progress);
      write_fwer_csv(file("fig3_fwer.csv"), r);
      collect(r.invariant_failures);
    } else if (e == "lkc") {
      const LKCReport r = run_lkc_experiment(c, progress);
      write_lkc_csv(file("fig2_lkc_bias.csv"), r);
      write_lkc_summary_csv(file("lkc_summary.csv"), r);
      collect(r.invariant_failures);
    } else if (e == "eec") {
      const EECReport r = run_eec_experiment(c, progress);
      write_eec_csv(file("fig5_eec.csv"), r);
      collect(r.invariant_failures);
    } else if (e == "fwhm_bias") {
      const FWHMBiasReport r = run_fwhm_bias_experiment(c, progress);
      write_fwhm_bias_csv(file("figC1_fwhm_bias.csv"), r);
      collect(r.invariant_failures);
    }
  }
  return out;
}

}  // namespace rft
