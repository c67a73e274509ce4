#include "minet/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "minet/error.hpp"

namespace minet {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_double(const std::string& s, const std::string& where) {
  const std::string t = trim(s);
  if (t.empty()) throw FormatError(where + ": empty numeric field");
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size()) {
    throw FormatError(where + ": not a number: '" + t + "'");
  }
  if (!std::isfinite(v)) throw FormatError(where + ": non-finite value '" + t + "'");
  return v;
}

long parse_label(const std::string& s, const std::string& where) {
  const std::string t = trim(s);
  char* end = nullptr;
  const long v = std::strtol(t.c_str(), &end, 10);
  if (t.empty() || end != t.c_str() + t.size() || v < 0) {
    throw FormatError(where + ": label must be a non-negative integer, got '" + t + "'");
  }
  return v;
}

std::string loc(const std::filesystem::path& path, std::size_t line_no) {
  return path.filename().string() + ":" + std::to_string(line_no);
}

}  // namespace

std::size_t Dataset::instance_count() const {
  std::size_t n = 0;
  for (const Bag& b : bags) n += b.size();
  return n;
}

void Dataset::validate() const {
  std::set<std::string> ids;
  for (const Bag& bag : bags) {
    if (bag.size() == 0) {
      throw FormatError("dataset '" + name + "': bag '" + bag.bag_id + "' has no instances");
    }
    if (bag.width() != d_feat) {
      throw FormatError("dataset '" + name + "': bag '" + bag.bag_id + "' has width " +
                        std::to_string(bag.width()) + ", expected " + std::to_string(d_feat));
    }
    if (bag.label < 0 || static_cast<std::size_t>(bag.label) >= class_count) {
      throw FormatError("dataset '" + name + "': bag '" + bag.bag_id + "' label " +
                        std::to_string(bag.label) + " outside 0.." +
                        std::to_string(class_count - 1));
    }
    if (!bag.instance_labels.empty() && bag.instance_labels.size() != bag.size()) {
      throw FormatError("dataset '" + name + "': bag '" + bag.bag_id +
                        "' instance_labels length mismatch");
    }
    if (!ids.insert(bag.bag_id).second) {
      throw FormatError("dataset '" + name + "': duplicate bag_id '" + bag.bag_id + "'");
    }
    require_finite(bag.instances, "dataset '" + name + "', bag '" + bag.bag_id + "'");
  }
}

Dataset load_bag_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line)) {
    throw FormatError(path.filename().string() + ": empty file");
  }
  const std::vector<std::string> header = split_csv(line);
  if (header.size() < 3 || header[0] != "bag_id" || header[1] != "label") {
    throw FormatError(loc(path, 1) + ": expected header 'bag_id,label,f0,...'");
  }
  const std::size_t d_feat = header.size() - 2;

  // rows grouped by bag_id in first-appearance order
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::vector<double>>> rows;
  std::map<std::string, int> labels;
  long max_label = 0;

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> fields = split_csv(line);
    if (fields.size() != d_feat + 2) {
      throw FormatError(loc(path, line_no) + ": expected " + std::to_string(d_feat + 2) +
                        " fields, got " + std::to_string(fields.size()));
    }
    const std::string& id = fields[0];
    const long label = parse_label(fields[1], loc(path, line_no));
    std::vector<double> feats(d_feat);
    for (std::size_t j = 0; j < d_feat; ++j) {
      feats[j] = parse_double(fields[j + 2], loc(path, line_no));
    }
    auto it = labels.find(id);
    if (it == labels.end()) {
      labels[id] = static_cast<int>(label);
      order.push_back(id);
    } else if (it->second != label) {
      throw FormatError(loc(path, line_no) + ": bag '" + id + "' has conflicting labels " +
                        std::to_string(it->second) + " and " + std::to_string(label));
    }
    max_label = std::max(max_label, label);
    rows[id].push_back(std::move(feats));
  }
  if (order.empty()) {
    throw FormatError(path.filename().string() + ": no instance rows");
  }

  Dataset ds;
  ds.name = path.stem().string();
  ds.d_feat = d_feat;
  ds.class_count = static_cast<std::size_t>(std::max<long>(max_label + 1, 2));
  for (const std::string& id : order) {
    Bag bag;
    bag.bag_id = id;
    bag.label = labels[id];
    const auto& bag_rows = rows[id];
    bag.instances = Matrix(bag_rows.size(), d_feat);
    for (std::size_t i = 0; i < bag_rows.size(); ++i) {
      std::copy(bag_rows[i].begin(), bag_rows[i].end(), bag.instances.row(i));
    }
    ds.bags.push_back(std::move(bag));
  }
  ds.validate();
  return ds;
}

void save_bag_csv(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "bag_id,label";
  for (std::size_t j = 0; j < dataset.d_feat; ++j) out << ",f" << j;
  out << "\n";
  char buf[64];
  for (const Bag& bag : dataset.bags) {
    for (std::size_t i = 0; i < bag.size(); ++i) {
      out << bag.bag_id << "," << bag.label;
      for (std::size_t j = 0; j < dataset.d_feat; ++j) {
        std::snprintf(buf, sizeof buf, "%.17g", bag.instances(i, j));
        out << "," << buf;
      }
      out << "\n";
    }
  }
  if (!out) throw IoError("failed while writing " + path.string());
}

Dataset load_musk_c45(const std::filesystem::path& path) {
  constexpr std::size_t kFeatures = 166;
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());

  std::vector<std::string> order;
  std::map<std::string, std::vector<std::vector<double>>> rows;
  std::map<std::string, int> labels;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '|') continue;  // C4.5 comment convention
    const std::vector<std::string> fields = split_csv(t);
    if (fields.size() != kFeatures + 3) {
      throw FormatError(loc(path, line_no) + ": expected " + std::to_string(kFeatures + 3) +
                        " fields, got " + std::to_string(fields.size()));
    }
    const std::string& molecule = fields[0];
    std::vector<double> feats(kFeatures);
    for (std::size_t j = 0; j < kFeatures; ++j) {
      feats[j] = parse_double(fields[j + 2], loc(path, line_no));
    }
    const double cls = parse_double(fields.back(), loc(path, line_no));
    int row_label;
    if (cls == 0.0) {
      row_label = 0;
    } else if (cls == 1.0) {
      row_label = 1;
    } else {
      throw FormatError(loc(path, line_no) + ": class must be 0 or 1, got '" +
                        fields.back() + "'");
    }
    auto it = labels.find(molecule);
    if (it == labels.end()) {
      labels[molecule] = row_label;
      order.push_back(molecule);
    } else {
      // bag label is the OR over the molecule's conformations
      it->second = it->second | row_label;
    }
    rows[molecule].push_back(std::move(feats));
  }
  if (order.empty()) {
    throw FormatError(path.filename().string() + ": empty file");
  }

  Dataset ds;
  ds.name = path.stem().string();
  ds.d_feat = kFeatures;
  ds.class_count = 2;
  for (const std::string& molecule : order) {
    Bag bag;
    bag.bag_id = molecule;
    bag.label = labels[molecule];
    const auto& bag_rows = rows[molecule];
    bag.instances = Matrix(bag_rows.size(), kFeatures);
    for (std::size_t i = 0; i < bag_rows.size(); ++i) {
      std::copy(bag_rows[i].begin(), bag_rows[i].end(), bag.instances.row(i));
    }
    ds.bags.push_back(std::move(bag));
  }
  ds.validate();
  return ds;
}

Dataset load_dataset(const std::filesystem::path& path, DataFormat format) {
  switch (format) {
    case DataFormat::bag_csv:
      return load_bag_csv(path);
    case DataFormat::musk_c45:
      return load_musk_c45(path);
  }
  throw ConfigError("load_dataset: unknown format");
}

NormStats fit_norm_stats(const std::vector<Bag>& train_bags) {
  std::size_t n = 0;
  for (const Bag& b : train_bags) n += b.size();
  if (n == 0) {
    throw DomainError("fit_norm_stats: no training instances");
  }
  const std::size_t d = train_bags.front().width();
  NormStats stats;
  stats.mean.assign(d, 0.0);
  stats.stddev.assign(d, 0.0);
  for (const Bag& b : train_bags) {
    for (std::size_t i = 0; i < b.size(); ++i) {
      const double* row = b.instances.row(i);
      for (std::size_t j = 0; j < d; ++j) stats.mean[j] += row[j];
    }
  }
  for (double& m : stats.mean) m /= static_cast<double>(n);
  for (const Bag& b : train_bags) {
    for (std::size_t i = 0; i < b.size(); ++i) {
      const double* row = b.instances.row(i);
      for (std::size_t j = 0; j < d; ++j) {
        const double dev = row[j] - stats.mean[j];
        stats.stddev[j] += dev * dev;
      }
    }
  }
  for (double& s : stats.stddev) {
    s = std::max(std::sqrt(s / static_cast<double>(n)), 1e-8);
  }
  return stats;
}

Bag apply_norm(const NormStats& stats, const Bag& bag) {
  if (bag.width() != stats.mean.size()) {
    throw ShapeError("apply_norm: bag width " + std::to_string(bag.width()) +
                     " vs stats width " + std::to_string(stats.mean.size()));
  }
  Bag out = bag;
  for (std::size_t i = 0; i < out.size(); ++i) {
    double* row = out.instances.row(i);
    for (std::size_t j = 0; j < out.width(); ++j) {
      row[j] = (row[j] - stats.mean[j]) / stats.stddev[j];
    }
  }
  return out;
}

std::vector<Bag> apply_norm(const NormStats& stats, const std::vector<Bag>& bags) {
  std::vector<Bag> out;
  out.reserve(bags.size());
  for (const Bag& b : bags) out.push_back(apply_norm(stats, b));
  return out;
}

std::pair<NormStats, std::vector<Bag>> normalize(const std::vector<Bag>& train_bags,
                                                 const std::vector<Bag>& all_bags) {
  NormStats stats = fit_norm_stats(train_bags);
  return {stats, apply_norm(stats, all_bags)};
}

FoldPlan stratified_kfold(const Dataset& dataset, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw DomainError("stratified_kfold: k must be >= 2");
  if (k > dataset.bags.size()) {
    throw DomainError("stratified_kfold: k=" + std::to_string(k) + " exceeds bag count " +
                      std::to_string(dataset.bags.size()));
  }
  // Shuffle within each class, then deal classes one after another with a
  // single running cursor: per-class and total fold sizes both differ by <= 1.
  std::vector<std::vector<std::size_t>> by_class(dataset.class_count);
  for (std::size_t i = 0; i < dataset.bags.size(); ++i) {
    by_class[static_cast<std::size_t>(dataset.bags[i].label)].push_back(i);
  }
  Rng rng(seed);
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  std::size_t cursor = rng.below(k);
  for (auto& members : by_class) {
    rng.shuffle(members);
    for (std::size_t idx : members) {
      plan.assignments[dataset.bags[idx].bag_id] = cursor % k;
      ++cursor;
    }
  }
  return plan;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> fold_split(
    const Dataset& dataset, const FoldPlan& plan, std::size_t fold) {
  if (fold >= plan.k) {
    throw DomainError("fold_split: fold " + std::to_string(fold) + " out of range");
  }
  std::vector<std::size_t> train, test;
  for (std::size_t i = 0; i < dataset.bags.size(); ++i) {
    const auto it = plan.assignments.find(dataset.bags[i].bag_id);
    if (it == plan.assignments.end()) {
      throw ContractError("fold_split: bag '" + dataset.bags[i].bag_id +
                          "' missing from fold plan");
    }
    (it->second == fold ? test : train).push_back(i);
  }
  return {train, test};
}

Dataset synth_witness(const SynthConfig& config, std::uint64_t seed) {
  if (config.witness_rate <= 0.0 || config.witness_rate > 1.0) {
    throw DomainError("synth_witness: witness_rate must be in (0, 1]");
  }
  if (config.cluster_separation <= 0.0) {
    throw DomainError("synth_witness: cluster_separation must be positive");
  }
  if (config.bag_size_min < 1 || config.bag_size_max < config.bag_size_min) {
    throw DomainError("synth_witness: invalid bag size range");
  }
  if (config.d_feat < 1 || config.n_bags < 2) {
    throw DomainError("synth_witness: need d_feat >= 1 and n_bags >= 2");
  }
  if (config.noise_std < 0.0) {
    throw DomainError("synth_witness: noise_std must be non-negative");
  }

  // Witness centroid sits at L2 distance cluster_separation from the
  // background centroid, spread evenly over all features.
  const double shift = config.cluster_separation / std::sqrt(static_cast<double>(config.d_feat));

  Rng rng(seed);
  Dataset ds;
  ds.name = "synth_witness";
  ds.d_feat = config.d_feat;
  ds.class_count = 2;

  char id[32];
  for (std::size_t b = 0; b < config.n_bags; ++b) {
    const int label = static_cast<int>(b % 2);
    const std::size_t k =
        config.bag_size_min + rng.below(config.bag_size_max - config.bag_size_min + 1);

    std::vector<int> witness(k, 0);
    if (label == 1) {
      std::size_t count = 0;
      for (std::size_t i = 0; i < k; ++i) {
        if (rng.uniform() < config.witness_rate) ++count;
      }
      count = std::max<std::size_t>(count, 1);
      std::vector<std::size_t> positions(k);
      for (std::size_t i = 0; i < k; ++i) positions[i] = i;
      rng.shuffle(positions);
      for (std::size_t i = 0; i < count; ++i) witness[positions[i]] = 1;
    }

    Bag bag;
    std::snprintf(id, sizeof id, "synth%05zu", b);
    bag.bag_id = id;
    bag.label = label;
    bag.instances = Matrix(k, config.d_feat);
    bag.instance_labels = witness;
    for (std::size_t i = 0; i < k; ++i) {
      double* row = bag.instances.row(i);
      const double base = witness[i] ? shift : 0.0;
      for (std::size_t j = 0; j < config.d_feat; ++j) {
        row[j] = base + config.noise_std * rng.gaussian();
      }
    }
    ds.bags.push_back(std::move(bag));
  }
  ds.validate();
  return ds;
}

}  // namespace minet
