#include "ncdnet/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "ncdnet/classify.hpp"
#include "ncdnet/error.hpp"
#include "ncdnet/matrix_io.hpp"
#include "ncdnet/network.hpp"
#include "ncdnet/spectral.hpp"

namespace ncdnet {
namespace {

namespace fs = std::filesystem;

template <typename T>
T parse_value(const std::string& key, const std::string& v) {
  std::istringstream ss(v);
  T out{};
  if (!(ss >> out) || !ss.eof()) throw Error(Errc::BadConfig, "bad value for " + key + ": '" + v + "'");
  return out;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(6);
  out << v;
  return out.str();
}

template <typename Range>
std::string join(const Range& r) {
  std::ostringstream out;
  bool first = true;
  for (const auto& v : r) {
    out << (first ? "" : ",") << v;
    first = false;
  }
  return out.str();
}

int texture_frequency(int c) {
  static constexpr int kTable[] = {2, 3, 4, 6, 8};
  return c < 5 ? kTable[c] : 2 * c;
}

/// Per filter: mean and population standard deviation of the response.
Eigen::VectorXd filter_statistics(const FeatureMap& map) {
  const auto& cols = map.columns();
  Eigen::VectorXd f(2 * cols.cols());
  for (Eigen::Index j = 0; j < cols.cols(); ++j) {
    const double mean = cols.col(j).mean();
    f[2 * j] = mean;
    f[2 * j + 1] = std::sqrt((cols.col(j).array() - mean).square().mean());
  }
  return f;
}

struct Split {
  std::vector<LabeledImage> train;
  std::vector<LabeledImage> validation;
};

Split stratified_split(const std::vector<LabeledImage>& items, double fraction, std::uint64_t seed) {
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < items.size(); ++i) by_class[items[i].label].push_back(i);
  std::mt19937_64 rng(seed);
  Split split;
  for (auto& [label, idx] : by_class) {
    std::shuffle(idx.begin(), idx.end(), rng);
    auto n_val = static_cast<std::size_t>(std::lround(fraction * static_cast<double>(idx.size())));
    if (idx.size() >= 2) n_val = std::clamp<std::size_t>(n_val, 1, idx.size() - 1);
    else n_val = 0;
    for (std::size_t i = 0; i < idx.size(); ++i) (i < n_val ? split.validation : split.train).push_back(items[idx[i]]);
  }
  return split;
}

Eigen::VectorXd take(const Eigen::VectorXd& v, const std::vector<Eigen::Index>& dims) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(dims.size()));
  for (std::size_t i = 0; i < dims.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[dims[i]];
  return out;
}

struct Accuracies {
  double centroid = 0.0;
  double hinge = 0.0;
};

Accuracies evaluate(const LabeledSet& train, const LabeledSet& validation, const ExperimentConfig& cfg) {
  const auto centroid = centroid_train(train);
  Accuracies acc;
  acc.centroid = accuracy(validation, [&](const Eigen::VectorXd& v) { return centroid_predict(centroid, v); });
  // The hinge model is trained on z-scored features; raw sigmoid statistics
  // leave subgradient descent stuck at chance.
  const auto z = Standardizer::fit(train);
  const LabeledSet tr = z.apply(train), va = z.apply(validation);
  if (tr.classes.size() >= 2) {
    const auto hinge = hinge_train(tr, cfg.hinge_epochs, cfg.hinge_rate, cfg.seed);
    acc.hinge = accuracy(va, [&](const Eigen::VectorXd& v) { return hinge_predict(hinge, v); });
  } else {
    acc.hinge = accuracy(va, [&](const Eigen::VectorXd&) { return tr.classes.front(); });
  }
  return acc;
}

}  // namespace

ExperimentConfig parse_experiment_config(std::string_view text, const fs::path& base_dir) {
  ExperimentConfig cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(Errc::BadConfig, "line " + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    auto resolve = [&](const std::string& v) {
      if (v.empty() || v == "synthetic") return v;
      const fs::path p(v);
      return (p.is_relative() && !base_dir.empty() ? base_dir / p : p).string();
    };
    if (key == "dataset") cfg.dataset = resolve(value);
    else if (key == "classes") cfg.classes = parse_value<int>(key, value);
    else if (key == "images_per_class") cfg.images_per_class = parse_value<int>(key, value);
    else if (key == "image_size") cfg.image_size = parse_value<int>(key, value);
    else if (key == "noise") cfg.noise = parse_value<double>(key, value);
    else if (key == "seed") cfg.seed = parse_value<std::uint64_t>(key, value);
    else if (key == "network") cfg.network = resolve(value);
    else if (key == "selection") {
      if (value == "dimensions") cfg.selection = SelectionMode::dimensions;
      else if (value == "samples") cfg.selection = SelectionMode::samples;
      else throw Error(Errc::BadConfig, "selection must be dimensions or samples");
    } else if (key == "criterion") cfg.criterion = parse_value<double>(key, value);
    else if (key == "compressor") {
      try {
        cfg.compressor = parse_compressor(value);
      } catch (const Error& e) {
        throw Error(Errc::BadConfig, e.what());
      }
    } else if (key == "validation_fraction") cfg.validation_fraction = parse_value<double>(key, value);
    else if (key == "augment") {
      try {
        cfg.augment = value.empty() ? std::vector<AugmentOp>{} : parse_augment_ops(value);
      } catch (const Error& e) {
        throw Error(Errc::BadConfig, e.what());
      }
    } else if (key == "denoise") cfg.denoise = parse_value<int>(key, value);
    else if (key == "sigma") cfg.sigma = value == "auto" ? 0.0 : parse_value<double>(key, value);
    else if (key == "spectral_k") cfg.spectral_k = parse_value<int>(key, value);
    else if (key == "hinge_epochs") cfg.hinge_epochs = parse_value<int>(key, value);
    else if (key == "hinge_rate") cfg.hinge_rate = parse_value<double>(key, value);
    else if (key == "threads") cfg.threads = parse_value<unsigned>(key, value);
    else throw Error(Errc::BadConfig, "line " + std::to_string(line_no) + ": unknown key '" + key + "'");
  }
  if (cfg.classes < 2 || cfg.images_per_class < 2 || cfg.image_size < 8) {
    throw Error(Errc::BadConfig, "need classes >= 2, images_per_class >= 2, image_size >= 8");
  }
  if (!(cfg.validation_fraction > 0.0 && cfg.validation_fraction < 1.0)) {
    throw Error(Errc::BadConfig, "validation_fraction must be in (0, 1)");
  }
  if (cfg.denoise != 0 && (cfg.denoise < 3 || cfg.denoise % 2 == 0)) {
    throw Error(Errc::BadConfig, "denoise must be 0 or an odd window >= 3");
  }
  for (const auto& op : cfg.augment)
    if (op.kind == AugmentKind::partition) throw Error(Errc::BadConfig, "partition changes image size; not usable here");
  if (cfg.spectral_k < 1) throw Error(Errc::BadConfig, "spectral_k must be >= 1");
  return cfg;
}

ExperimentConfig load_experiment_config(const fs::path& path) {
  return parse_experiment_config(read_file(path), path.parent_path());
}

std::string default_network_config(std::uint64_t seed) {
  std::ostringstream out;
  out << "layer type=conv filters=4 size=3 stride=1 padding=1 activation=sigmoid B=1 seed=" << seed * 10 + 1 << '\n'
      << "layer type=ncd filters=8 size=3 stride=1 padding=1 activation=sigmoid B=1 seed=" << seed * 10 + 2
      << " criterion=0.4\n"
      << "layer type=meanpool size=2 stride=2\n";
  return out.str();
}

std::vector<LabeledImage> synthetic_textures(int classes, int per_class, int size, double noise, std::uint64_t seed) {
  if (classes < 1 || per_class < 1 || size < 1) throw Error(Errc::BadParams, "synthetic set needs positive sizes");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::normal_distribution<double> jitter(0.0, noise > 0.0 ? noise : 1.0);
  std::vector<LabeledImage> out;
  for (int c = 0; c < classes; ++c) {
    const double w = 2.0 * std::numbers::pi * texture_frequency(c) / size;
    for (int i = 0; i < per_class; ++i) {
      const double px = phase(rng), py = phase(rng);
      GrayImage img{PixelMatrix(size, size)};
      for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
          double v = 127.5 + 127.5 * std::cos(w * x + px) * std::cos(w * y + py);
          if (noise > 0.0) v += jitter(rng);
          img.pixels(y, x) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
        }
      out.push_back({std::move(img), c});
    }
  }
  return out;
}

std::vector<LabeledImage> load_dataset_dir(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw Error(Errc::IoFailure, "not a directory: " + dir.string());
  std::vector<fs::path> class_dirs;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_directory()) class_dirs.push_back(e.path());
  std::sort(class_dirs.begin(), class_dirs.end());
  std::vector<LabeledImage> out;
  for (std::size_t c = 0; c < class_dirs.size(); ++c) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(class_dirs[c]))
      if (e.is_regular_file() && e.path().extension() == ".pgm") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) out.push_back({load_image(f), static_cast<int>(c)});
  }
  if (out.empty()) throw Error(Errc::EmptyInput, "no .pgm images under " + dir.string());
  for (const auto& item : out) {
    if (item.image.height() != out.front().image.height() || item.image.width() != out.front().image.width()) {
      throw Error(Errc::BadFormat, "dataset images differ in size");
    }
  }
  return out;
}

void Report::set(const std::string& section, const std::string& key, const std::string& value) {
  auto& entries = sections[section];
  for (auto& [k, v] : entries)
    if (k == key) {
      v = value;
      return;
    }
  entries.emplace_back(key, value);
}

std::optional<std::string> Report::get(const std::string& section, const std::string& key) const {
  const auto it = sections.find(section);
  if (it == sections.end()) return std::nullopt;
  for (const auto& [k, v] : it->second)
    if (k == key) return v;
  return std::nullopt;
}

std::string Report::to_text() const {
  std::ostringstream out;
  for (const char* name : kStages) {
    out << '[' << name << "]\n";
    if (const auto it = sections.find(name); it != sections.end())
      for (const auto& [k, v] : it->second) out << k << '=' << v << '\n';
    out << '\n';
  }
  out << "[STATUS]\nstatus=" << (ok ? "ok" : "failed") << '\n';
  if (!ok) out << "failed_stage=" << failed_stage << "\nerror=" << error << '\n';
  return out.str();
}

Report run_experiment(const ExperimentConfig& cfg, ExperimentArtifacts* artifacts) {
  using clock = std::chrono::steady_clock;
  Report report;
  ExperimentArtifacts local;
  ExperimentArtifacts& art = artifacts ? *artifacts : local;
  std::string stage = "INGEST";
  auto t0 = clock::now();
  auto lap = [&](const std::string& name) {
    const auto now = clock::now();
    report.set("TIMING", name + "_seconds", fmt(std::chrono::duration<double>(now - t0).count()));
    t0 = now;
  };
  for (const char* name : Report::kStages) report.sections[name];

  try {
    std::vector<LabeledImage> images =
        cfg.dataset == "synthetic"
            ? synthetic_textures(cfg.classes, cfg.images_per_class, cfg.image_size, cfg.noise, cfg.seed)
            : load_dataset_dir(cfg.dataset);
    if (cfg.denoise > 0)
      for (auto& item : images) item.image = median_denoise(item.image, cfg.denoise);
    Split split = stratified_split(images, cfg.validation_fraction, cfg.seed);
    const std::size_t originals = split.train.size();
    for (std::size_t i = 0; i < originals; ++i)
      for (const auto& op : cfg.augment)
        for (auto& img : augment(split.train[i].image, op)) split.train.push_back({std::move(img), split.train[i].label});
    std::vector<int> labels_seen;
    for (const auto& item : images) labels_seen.push_back(item.label);
    std::sort(labels_seen.begin(), labels_seen.end());
    labels_seen.erase(std::unique(labels_seen.begin(), labels_seen.end()), labels_seen.end());
    if (labels_seen.size() < 2) throw Error(Errc::DegenerateData, "need at least two classes");
    if (split.validation.empty()) throw Error(Errc::DegenerateData, "validation split is empty");
    report.set("INGEST", "source", cfg.dataset);
    report.set("INGEST", "classes", std::to_string(labels_seen.size()));
    report.set("INGEST", "images", std::to_string(images.size()));
    report.set("INGEST", "image_size", std::to_string(images.front().image.height()) + "x" +
                                           std::to_string(images.front().image.width()));
    report.set("INGEST", "denoise_window", std::to_string(cfg.denoise));
    std::vector<std::string> ops;
    for (const auto& op : cfg.augment) ops.push_back(to_string(op));
    report.set("INGEST", "augment", join(ops));
    report.set("INGEST", "train_images", std::to_string(split.train.size()));
    report.set("INGEST", "validation_images", std::to_string(split.validation.size()));
    lap("ingest");

    stage = "FORWARD";
    const auto layers = parse_network_config(cfg.network.empty() ? default_network_config(cfg.seed)
                                                                 : read_file(cfg.network));
    const Network net(layers, images.front().image.height(), images.front().image.width(), 1);
    const std::size_t mid = net.middle_layer();
    auto features_of = [&](const std::vector<LabeledImage>& set) {
      std::vector<Eigen::VectorXd> items;
      std::vector<int> labels;
      for (const auto& item : set) {
        const auto trace = net.forward(image_to_tensor(item.image), mid, false);
        items.push_back(filter_statistics(trace.outputs.back()));
        labels.push_back(item.label);
      }
      return LabeledSet::from(std::move(items), std::move(labels));
    };
    const LabeledSet train = features_of(split.train);
    const LabeledSet validation = features_of(split.validation);
    const auto [mid_h, mid_w] = net.output_sizes()[mid];
    report.set("FORWARD", "layers", std::to_string(net.layer_count()));
    report.set("FORWARD", "feature_layer", std::to_string(mid));
    report.set("FORWARD", "feature_map", std::to_string(mid_h) + "x" + std::to_string(mid_w));
    report.set("FORWARD", "feature_dimension", std::to_string(train.dimension()));
    report.set("FORWARD", "feature_kind", "per-filter mean,std");
    lap("forward");

    stage = "SELECT";
    const SelectionConfig sel_cfg{cfg.criterion, cfg.compressor, kDefaultNcdEpsilon, cfg.threads};
    Eigen::MatrixXd columns;
    if (cfg.selection == SelectionMode::dimensions) {
      columns.resize(static_cast<Eigen::Index>(train.items.size()), train.dimension());
      for (std::size_t i = 0; i < train.items.size(); ++i) columns.row(static_cast<Eigen::Index>(i)) = train.items[i].transpose();
    } else {
      columns.resize(train.dimension(), static_cast<Eigen::Index>(train.items.size()));
      for (std::size_t i = 0; i < train.items.size(); ++i) columns.col(static_cast<Eigen::Index>(i)) = train.items[i];
    }
    art.selection = select_features(columns, sel_cfg);
    const auto& sel = *art.selection;
    art.full_count = static_cast<std::size_t>(columns.cols());
    art.distance = sel.matrix.matrix();
    report.set("SELECT", "mode", cfg.selection == SelectionMode::dimensions ? "dimensions" : "samples");
    report.set("SELECT", "compressor", std::string(compressor_name(cfg.compressor.kind)));
    report.set("SELECT", "full_count", std::to_string(art.full_count));
    report.set("SELECT", "selected_count", std::to_string(sel.kept.size()));
    report.set("SELECT", "kept", join(sel.kept));
    report.set("SELECT", "criterion", fmt(cfg.criterion));
    report.set("SELECT", "criterion_used", fmt(sel.criterion_used));
    report.set("SELECT", "fallback_applied", sel.fallback_applied ? "true" : "false");
    if (sel.matrix.size() >= 2) report.set("SELECT", "offdiag_mean", fmt(offdiag_mean(sel.matrix)));
    lap("select");

    stage = "CLASSIFY";
    LabeledSet train_sel, validation_sel;
    if (cfg.selection == SelectionMode::dimensions) {
      auto project = [&](const LabeledSet& s) {
        std::vector<Eigen::VectorXd> items;
        for (const auto& v : s.items) items.push_back(take(v, sel.kept));
        return LabeledSet::from(std::move(items), s.labels);
      };
      train_sel = project(train);
      validation_sel = project(validation);
    } else {
      std::vector<Eigen::VectorXd> items;
      std::vector<int> labels;
      for (const auto k : sel.kept) {
        items.push_back(train.items[static_cast<std::size_t>(k)]);
        labels.push_back(train.labels[static_cast<std::size_t>(k)]);
      }
      train_sel = LabeledSet::from(std::move(items), std::move(labels));
      validation_sel = validation;
    }
    const Accuracies full = evaluate(train, validation, cfg);
    const Accuracies selected = evaluate(train_sel, validation_sel, cfg);
    art.centroid_full = full.centroid;
    art.centroid_selected = selected.centroid;
    art.hinge_full = full.hinge;
    art.hinge_selected = selected.hinge;
    report.set("CLASSIFY", "train_items_full", std::to_string(train.items.size()));
    report.set("CLASSIFY", "train_items_selected", std::to_string(train_sel.items.size()));
    report.set("CLASSIFY", "dimension_full", std::to_string(train.dimension()));
    report.set("CLASSIFY", "dimension_selected", std::to_string(train_sel.dimension()));
    report.set("CLASSIFY", "centroid_accuracy_full", fmt(full.centroid));
    report.set("CLASSIFY", "centroid_accuracy_selected", fmt(selected.centroid));
    report.set("CLASSIFY", "hinge_accuracy_full", fmt(full.hinge));
    report.set("CLASSIFY", "hinge_accuracy_selected", fmt(selected.hinge));
    lap("classify");

    stage = "SPECTRAL";
    const auto n = art.distance.rows();
    const double sigma = cfg.sigma > 0.0 ? cfg.sigma : median_offdiag(art.distance);
    const auto bundle = spectral_bundle(art.distance, sigma);
    report.set("SPECTRAL", "n", std::to_string(n));
    report.set("SPECTRAL", "sigma", fmt(sigma));
    report.set("SPECTRAL", "eigenvalues", join(std::vector<double>(bundle.eigenvalues.data(),
                                                                   bundle.eigenvalues.data() + bundle.eigenvalues.size())));
    if (n >= 3) {
      art.embedding = bundle.embedding;
      const int k = std::min<int>(cfg.spectral_k, static_cast<int>(n));
      art.labels = partition(art.embedding, k, cfg.seed);
      report.set("SPECTRAL", "k", std::to_string(k));
      report.set("SPECTRAL", "labels", join(art.labels));
    } else {
      report.set("SPECTRAL", "embedding", "skipped (n < 3)");
    }
    lap("spectral");
  } catch (const std::exception& e) {
    report.ok = false;
    report.failed_stage = stage;
    report.error = e.what();
  }
  return report;
}

}  // namespace ncdnet
