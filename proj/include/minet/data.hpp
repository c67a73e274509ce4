#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "minet/matrix.hpp"
#include "minet/rng.hpp"

namespace minet {

// One labeled set of instances; the unit of supervision. instance_labels are
// carried only by synthetic data as ground truth and are never read by
// training.
struct Bag {
  std::string bag_id;
  int label = 0;
  Matrix instances;  // k x d_feat, k >= 1
  std::vector<int> instance_labels;  // empty, or one {0,1} entry per instance

  std::size_t size() const { return instances.rows; }
  std::size_t width() const { return instances.cols; }
};

struct Dataset {
  std::string name;
  std::size_t d_feat = 0;
  std::size_t class_count = 2;
  std::vector<Bag> bags;

  std::size_t instance_count() const;
  // Enforces the type invariants (unique ids, label range, uniform width,
  // non-empty bags); throws FormatError/DomainError on violation.
  void validate() const;
};

struct NormStats {
  std::vector<double> mean;
  std::vector<double> stddev;  // clamped at 1e-8
};

// Stratified fold assignment; every bag lands in exactly one fold and
// per-class counts across folds differ by at most one.
struct FoldPlan {
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::map<std::string, std::size_t> assignments;  // bag_id -> fold

  bool operator==(const FoldPlan&) const = default;
};

enum class DataFormat { bag_csv, musk_c45 };

// Bag-CSV: header `bag_id,label,f0,...,f{d-1}`, one instance per row, rows
// grouped by bag_id in first-appearance order. The label must be constant
// within a bag.
Dataset load_bag_csv(const std::filesystem::path& path);
void save_bag_csv(const Dataset& dataset, const std::filesystem::path& path);

// C4.5-style MUSK distribution: molecule name, conformation name, 166
// features, trailing class. Bag label is the OR over the molecule's rows.
Dataset load_musk_c45(const std::filesystem::path& path);

Dataset load_dataset(const std::filesystem::path& path, DataFormat format);

// Per-feature z-score fitted on the training instances only.
NormStats fit_norm_stats(const std::vector<Bag>& train_bags);
Bag apply_norm(const NormStats& stats, const Bag& bag);
std::vector<Bag> apply_norm(const NormStats& stats, const std::vector<Bag>& bags);
std::pair<NormStats, std::vector<Bag>> normalize(const std::vector<Bag>& train_bags,
                                                 const std::vector<Bag>& all_bags);

FoldPlan stratified_kfold(const Dataset& dataset, std::size_t k, std::uint64_t seed);
// Bag indices of the train/test split for one fold of the plan.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> fold_split(
    const Dataset& dataset, const FoldPlan& plan, std::size_t fold);

struct SynthConfig {
  std::size_t n_bags = 100;
  std::size_t bag_size_min = 4;
  std::size_t bag_size_max = 12;
  std::size_t d_feat = 10;
  double witness_rate = 0.1;
  double cluster_separation = 6.0;
  double noise_std = 1.0;
};

// Witness-bag generator: negative instances come from a background Gaussian
// blob, witnesses from a blob shifted by cluster_separation. Positive bags
// contain at least one witness, negative bags none, so the standard MIL bag
// labeling rule holds by construction; instance_labels record the witnesses.
Dataset synth_witness(const SynthConfig& config, std::uint64_t seed);

}  // namespace minet
