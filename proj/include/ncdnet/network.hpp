#pragma once

// Layer stack described by a text config, one layer per line:
//
//   # comment
//   layer type=conv filters=4 size=3 stride=1 padding=1 activation=sigmoid B=1 seed=7
//   layer type=ncd  filters=8 size=3 stride=1 padding=1 activation=sigmoid B=1 seed=9 criterion=0.4
//   layer type=maxpool size=2 stride=2
//
// Types: conv (multi-map convolution), ncd (convolution followed by NCD
// selection of filter columns), maxpool, meanpool. Weights are drawn
// uniformly from [-sqrt(3/fan_in), sqrt(3/fan_in)] with the layer seed.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ncdnet/convnet.hpp"
#include "ncdnet/ncd_layer.hpp"
#include "ncdnet/tensor.hpp"

namespace ncdnet {

enum class LayerType { conv, ncd, maxpool, meanpool };

struct LayerConfig {
  LayerType type = LayerType::conv;
  Index filters = 1;
  Index size = 3;
  Index stride = 1;
  Index padding = 0;
  Activation activation = Activation::sigmoid;
  double slope = 1.0;
  std::uint64_t seed = 0;
  double criterion = kDefaultCriterion;
  CompressorId compressor{};
};

std::vector<LayerConfig> parse_network_config(std::string_view text);
std::vector<LayerConfig> load_network_config(const std::filesystem::path& path);

struct ForwardTrace {
  std::vector<FeatureMap> outputs;                       ///< one per executed layer
  std::vector<std::optional<SelectionResult>> selections;  ///< set for ncd layers that selected
};

class Network {
 public:
  /// Builds weights and checks every layer's output size for an
  /// input_h x input_w x input_ch image; size violations throw here.
  Network(std::vector<LayerConfig> layers, Index input_h, Index input_w, Index input_ch = 1);

  /// Runs layers [0, last_layer]. With `apply_selection` false, ncd layers
  /// pass every filter column through unchanged.
  ForwardTrace forward(const FeatureMap& input, std::optional<std::size_t> last_layer = std::nullopt,
                       bool apply_selection = true) const;

  std::size_t layer_count() const noexcept { return layers_.size(); }
  /// floor(layer_count / 2), zero-based.
  std::size_t middle_layer() const noexcept { return layers_.size() / 2; }
  const std::vector<LayerConfig>& layers() const noexcept { return layers_; }
  /// Spatial output size of each layer.
  const std::vector<std::pair<Index, Index>>& output_sizes() const noexcept { return sizes_; }

 private:
  std::vector<LayerConfig> layers_;
  std::vector<std::optional<ConvLayerSpec<double>>> specs_;
  std::vector<std::pair<Index, Index>> sizes_;
  Index input_h_, input_w_, input_ch_;
};

}  // namespace ncdnet
