#pragma once

#include <functional>
#include <string>
#include <vector>

#include "rft/config.hpp"
#include "rft/ecd.hpp"
#include "rft/lkc.hpp"
#include "rft/noise.hpp"

namespace rft {

/// Resolution code for the continuous supremum (optimiser over S).
inline constexpr int kResolutionInfinity = -1;

/// Heavy-tail and variance profile for the synthetic contrast-map bank.
struct BankProfile {
  bool heterogeneous = true;
  /// Student-t generators: df varies linearly along axis 0 between these.
  double df_min = 3.0;
  double df_max = 30.0;
  /// Voxel sd varies linearly along the last axis between these.
  double sd_min = 0.5;
  double sd_max = 1.5;
};

struct ExperimentConfig {
  std::vector<std::string> experiments;  // any of: lkc, fwer, eec, fwhm_bias
  MaskPtr mask;
  std::vector<int> subjects{20};
  std::vector<double> fwhm{3.0};
  std::vector<int> resolutions{0, 1, kResolutionInfinity};
  int replicates = 1000;
  std::vector<double> alpha{0.05};
  Tails tails = Tails::two;
  std::vector<bool> gaussianize{false};
  NoiseSpec noise;
  /// Padding when noise.padding is unset in the file: eec and fwhm_bias pad
  /// by ceil(4 sigma), lkc and fwer smooth inside the mask only.
  bool padding_set = false;
  int workers = 1;
  int r_estimate = 1;
  int r_true = 21;
  std::vector<double> thresholds;
  /// Reproduce smoothing a 2D slice with a 3D kernel (slice embedded in a
  /// one-voxel-thick volume). The out-of-plane factor is the constant K_z(0).
  bool slice_kernel_3d = false;
  std::string source = "noise";  // or "bank"
  int bank_size = 7000;
  BankProfile bank;

  void validate() const;
  /// Padding in voxels for an experiment at a given FWHM.
  int padding_for(const std::string& experiment, double fwhm) const;
};

ExperimentConfig load_experiment_config(const Config& cfg);

using ProgressFn = std::function<void(const std::string&)>;

/// Runs fn(0..count-1) on `workers` threads. Exceptions are rethrown after
/// all workers stop (the one with the lowest index wins).
void parallel_for(int count, int workers, const std::function<void(int)>& fn);

// FWER ---------------------------------------------------------------------

struct FWERRow {
  int subjects = 0;
  double fwhm = 0.0;
  bool gaussianized = false;
  double alpha = 0.0;
  int resolution = 0;
  int replicates = 0;  // successful replicates
  int rejections = 0;
  double fwer = 0.0;
  double se = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double mean_maxima = 0.0;  // super-threshold local maxima of |T| on the r = 1 grid
  double mean_threshold = 0.0;
  int failures = 0;
};

/// Per replicate of one (N, fwhm, gaussianize) setting.
struct FWERReplicate {
  bool ok = false;
  std::string error;
  double sup0 = 0.0;
  double sup1 = 0.0;
  double sup_inf = 0.0;
  std::vector<double> thresholds;  // per alpha
  std::vector<int> maxima;         // per alpha
};

struct FWERReport {
  std::vector<FWERRow> rows;
  /// Replicates that broke FWER(r=0) <= FWER(r=1) <= FWER(r=inf) decisions.
  int nesting_violations = 0;
  std::vector<std::string> invariant_failures;
  /// Raw replicate data, keyed like the rows without alpha and resolution.
  struct Setting {
    int subjects;
    double fwhm;
    bool gaussianized;
    std::vector<FWERReplicate> replicates;
  };
  std::vector<Setting> settings;
};

FWERReport run_fwer_experiment(const ExperimentConfig& cfg, const ProgressFn& progress = {});

// LKC bias -----------------------------------------------------------------

struct LKCBiasRow {
  int subjects;
  double fwhm;
  bool gaussianized;
  int replicate;
  int d;
  double estimate;
  double truth;
  double rel_bias;
};

struct LKCSummaryRow {
  int subjects;
  double fwhm;
  bool gaussianized;
  int d;
  double truth;
  double median_rel_bias;
  double mean_rel_bias;
  int replicates;
};

struct LKCReport {
  std::vector<LKCBiasRow> rows;
  std::vector<LKCSummaryRow> summary;
  std::vector<std::string> invariant_failures;
};

LKCReport run_lkc_experiment(const ExperimentConfig& cfg, const ProgressFn& progress = {});

// EEC ----------------------------------------------------------------------

struct EECRow {
  int subjects;
  double fwhm;
  bool gaussianized;
  double u;
  double empirical;
  double se;
  double conv;
  double kiebel;
  double forman;
  double truth;
};

struct EECReport {
  std::vector<EECRow> rows;
  struct MeanLKC {
    int subjects;
    double fwhm;
    bool gaussianized;
    LKCVector conv, kiebel, forman, truth;
  };
  std::vector<MeanLKC> lkcs;
  std::vector<std::string> invariant_failures;
};

EECReport run_eec_experiment(const ExperimentConfig& cfg, const ProgressFn& progress = {});

// FWHM bias ------------------------------------------------------------------

struct FWHMBiasRow {
  int subjects;
  double fwhm;
  int replicates;
  double kiebel_bias, kiebel_sd;
  double forman_bias, forman_sd;
  double conv_bias, conv_sd;
};

struct FWHMBiasReport {
  std::vector<FWHMBiasRow> rows;
  std::vector<std::string> invariant_failures;
};

FWHMBiasReport run_fwhm_bias_experiment(const ExperimentConfig& cfg, const ProgressFn& progress = {});

// Bank ---------------------------------------------------------------------

/// n_total mean-zero lattice images. Student-t and Laplace generators are
/// scaled to unit variance before the sd profile is applied.
LatticeSample make_synthetic_bank(int n_total, const MaskPtr& mask, const NoiseSpec& generator,
                                  const BankProfile& profile, std::uint64_t seed);

struct Resampling {
  std::vector<std::vector<int>> indices;  // J lists of N bank indices
  std::string warning;                    // set when N / n_total > 0.05
};

/// J draws of N indices with replacement, deterministic in (seed, tag).
Resampling resample_bank(int n_total, int subjects, int draws, std::uint64_t seed, std::uint32_t tag = 0);

// Output -------------------------------------------------------------------

void write_fwer_csv(const std::string& path, const FWERReport& r);
void write_lkc_csv(const std::string& path, const LKCReport& r);
void write_lkc_summary_csv(const std::string& path, const LKCReport& r);
void write_eec_csv(const std::string& path, const EECReport& r);
void write_fwhm_bias_csv(const std::string& path, const FWHMBiasReport& r);

struct SimulationOutcome {
  std::vector<std::string> files;
  std::vector<std::string> invariant_failures;
};

/// Runs every listed experiment and writes its CSVs into `out_dir`.
SimulationOutcome run_experiments(const ExperimentConfig& cfg, const std::string& out_dir,
                                  const ProgressFn& progress = {});

}  // namespace rft
