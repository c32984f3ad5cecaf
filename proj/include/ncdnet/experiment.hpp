#pragma once

// End-to-end run: ingest -> augment -> forward -> select -> classify ->
// spectral, written as a sectioned key=value report.
//
// Config is one key=value per line ('#' starts a comment):
//
//   dataset=synthetic          # or a directory with one subdirectory of PGMs per class
//   classes=5                  # synthetic only
//   images_per_class=24        # synthetic only
//   image_size=32              # synthetic only
//   noise=25                   # synthetic only, pixel noise std
//   seed=1
//   network=                   # layer file; empty uses default_network_config(seed)
//   selection=dimensions       # or samples
//   criterion=0.4
//   compressor=bzip
//   validation_fraction=0.33
//   augment=                   # e.g. rot180,complement; applied to training images
//   denoise=3                  # median window, 0 disables
//   sigma=auto
//   spectral_k=5
//   hinge_epochs=60
//   hinge_rate=0.05
//   threads=0

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "ncdnet/compressor.hpp"
#include "ncdnet/image.hpp"
#include "ncdnet/ncd_layer.hpp"

namespace ncdnet {

enum class SelectionMode {
  dimensions,  ///< columns are feature dimensions observed over the training images
  samples,     ///< columns are per-image feature vectors
};

struct ExperimentConfig {
  std::string dataset = "synthetic";
  int classes = 5;
  int images_per_class = 24;
  int image_size = 32;
  double noise = 25.0;
  std::uint64_t seed = 1;
  std::string network;
  SelectionMode selection = SelectionMode::dimensions;
  double criterion = kDefaultCriterion;
  CompressorId compressor{};
  double validation_fraction = 0.33;
  std::vector<AugmentOp> augment;
  int denoise = 3;
  double sigma = 0.0;  ///< <= 0 means median off-diagonal distance
  int spectral_k = 5;
  int hinge_epochs = 60;
  double hinge_rate = 0.05;
  unsigned threads = 0;
};

/// Relative `network` and `dataset` paths resolve against `base_dir`.
ExperimentConfig parse_experiment_config(std::string_view text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

std::string default_network_config(std::uint64_t seed);

struct LabeledImage {
  GrayImage image;
  int label = 0;
};

/// Class c is a product of cosines at frequency {2, 3, 4, 6, 8, ...}[c]
/// cycles per image with random phases, plus Gaussian pixel noise.
std::vector<LabeledImage> synthetic_textures(int classes, int per_class, int size, double noise, std::uint64_t seed);

/// Each subdirectory of `dir` is a class (sorted by name); every *.pgm in it
/// is an item.
std::vector<LabeledImage> load_dataset_dir(const std::filesystem::path& dir);

struct Report {
  static constexpr const char* kStages[] = {"INGEST", "FORWARD", "SELECT", "CLASSIFY", "SPECTRAL", "TIMING"};

  std::map<std::string, std::vector<std::pair<std::string, std::string>>> sections;
  bool ok = true;
  std::string failed_stage;
  std::string error;

  void set(const std::string& section, const std::string& key, const std::string& value);
  std::optional<std::string> get(const std::string& section, const std::string& key) const;
  std::string to_text() const;
};

struct ExperimentArtifacts {
  Eigen::MatrixXd distance;    ///< selection distance matrix
  Eigen::MatrixXd embedding;   ///< spectral embedding of that matrix
  std::vector<int> labels;     ///< spectral partition labels
  std::optional<SelectionResult> selection;
  std::size_t full_count = 0;
  double centroid_full = 0.0;
  double centroid_selected = 0.0;
  double hinge_full = 0.0;
  double hinge_selected = 0.0;
};

/// Never throws for stage failures: the report records the failing stage and
/// the message, and carries whatever earlier stages produced.
Report run_experiment(const ExperimentConfig& cfg, ExperimentArtifacts* artifacts = nullptr);

}  // namespace ncdnet
