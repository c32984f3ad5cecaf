#include "ncdnet/network.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "ncdnet/error.hpp"
#include "ncdnet/matrix_io.hpp"

namespace ncdnet {
namespace {

LayerType parse_type(const std::string& v) {
  if (v == "conv") return LayerType::conv;
  if (v == "ncd") return LayerType::ncd;
  if (v == "maxpool") return LayerType::maxpool;
  if (v == "meanpool") return LayerType::meanpool;
  throw Error(Errc::BadConfig, "unknown layer type '" + v + "'");
}

template <typename T>
T parse_number(const std::string& key, const std::string& v, std::size_t line) {
  std::istringstream ss(v);
  T out{};
  if (!(ss >> out) || !ss.eof()) {
    throw Error(Errc::BadConfig, "line " + std::to_string(line) + ": bad value for " + key + ": '" + v + "'");
  }
  return out;
}

}  // namespace

std::vector<LayerConfig> parse_network_config(std::string_view text) {
  std::vector<LayerConfig> layers;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream tokens(line);
    std::string word;
    if (!(tokens >> word)) continue;
    if (word != "layer") throw Error(Errc::BadConfig, "line " + std::to_string(line_no) + ": expected 'layer'");

    LayerConfig cfg;
    bool has_type = false;
    while (tokens >> word) {
      const auto eq = word.find('=');
      if (eq == std::string::npos) {
        throw Error(Errc::BadConfig, "line " + std::to_string(line_no) + ": expected key=value, got '" + word + "'");
      }
      const std::string key = word.substr(0, eq), value = word.substr(eq + 1);
      if (key == "type") {
        cfg.type = parse_type(value);
        has_type = true;
      } else if (key == "filters") {
        cfg.filters = parse_number<Index>(key, value, line_no);
      } else if (key == "size") {
        cfg.size = parse_number<Index>(key, value, line_no);
      } else if (key == "stride") {
        cfg.stride = parse_number<Index>(key, value, line_no);
      } else if (key == "padding") {
        cfg.padding = parse_number<Index>(key, value, line_no);
      } else if (key == "activation") {
        if (value == "sigmoid") {
          cfg.activation = Activation::sigmoid;
        } else if (value == "none") {
          cfg.activation = Activation::none;
        } else {
          throw Error(Errc::BadConfig, "unknown activation '" + value + "'");
        }
      } else if (key == "B") {
        cfg.slope = parse_number<double>(key, value, line_no);
      } else if (key == "seed") {
        cfg.seed = parse_number<std::uint64_t>(key, value, line_no);
      } else if (key == "criterion") {
        cfg.criterion = parse_number<double>(key, value, line_no);
      } else if (key == "compressor") {
        cfg.compressor = parse_compressor(value);
      } else {
        throw Error(Errc::BadConfig, "line " + std::to_string(line_no) + ": unknown key '" + key + "'");
      }
    }
    if (!has_type) throw Error(Errc::BadConfig, "line " + std::to_string(line_no) + ": layer needs type=");
    if (cfg.filters < 1 || cfg.size < 1 || cfg.stride < 1 || cfg.padding < 0) {
      throw Error(Errc::BadConfig, "line " + std::to_string(line_no) + ": filters, size, stride >= 1 and padding >= 0");
    }
    layers.push_back(cfg);
  }
  if (layers.empty()) throw Error(Errc::BadConfig, "network config has no layers");
  return layers;
}

std::vector<LayerConfig> load_network_config(const std::filesystem::path& path) {
  return parse_network_config(read_file(path));
}

Network::Network(std::vector<LayerConfig> layers, Index input_h, Index input_w, Index input_ch)
    : layers_(std::move(layers)), input_h_(input_h), input_w_(input_w), input_ch_(input_ch) {
  Index h = input_h, w = input_w, ch = input_ch;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& cfg = layers_[i];
    try {
      if (cfg.type == LayerType::conv || cfg.type == LayerType::ncd) {
        std::mt19937_64 rng(cfg.seed);
        const double bound = std::sqrt(3.0 / static_cast<double>(cfg.size * cfg.size * ch));
        std::uniform_real_distribution<double> weight(-bound, bound);
        Tensor4<double> filters(cfg.size, cfg.size, ch, cfg.filters);
        for (Index r = 0; r < filters.columns().rows(); ++r)
          for (Index f = 0; f < cfg.filters; ++f) filters.columns()(r, f) = weight(rng);
        Eigen::VectorXd bias(cfg.filters);
        for (Index f = 0; f < cfg.filters; ++f) bias[f] = 0.1 * weight(rng);
        ConvLayerSpec<double> spec(std::move(filters), std::move(bias),
                                   {cfg.stride, cfg.padding, cfg.activation, cfg.slope});
        std::tie(h, w) = spec.output_size(h, w);
        ch = 1;
        specs_.emplace_back(std::move(spec));
      } else {
        h = conv_output_size(h, cfg.size, 0, cfg.stride);
        w = conv_output_size(w, cfg.size, 0, cfg.stride);
        specs_.emplace_back(std::nullopt);
      }
    } catch (const Error& e) {
      throw Error(e.code(), "layer " + std::to_string(i) + ": " + e.what());
    }
    sizes_.emplace_back(h, w);
  }
}

ForwardTrace Network::forward(const FeatureMap& input, std::optional<std::size_t> last_layer,
                              bool apply_selection) const {
  if (input.height() != input_h_ || input.width() != input_w_ || input.channels() != input_ch_) {
    throw Error(Errc::ShapeMismatch, "network built for " + std::to_string(input_h_) + "x" + std::to_string(input_w_) +
                                         "x" + std::to_string(input_ch_) + " input, got " + input.shape());
  }
  const std::size_t end = last_layer ? std::min(*last_layer + 1, layers_.size()) : layers_.size();
  ForwardTrace trace;
  const FeatureMap* current = &input;
  for (std::size_t i = 0; i < end; ++i) {
    const auto& cfg = layers_[i];
    std::optional<SelectionResult> selection;
    FeatureMap out;
    switch (cfg.type) {
      case LayerType::conv:
        out = multimap_forward(*current, *specs_[i]);
        break;
      case LayerType::ncd:
        if (apply_selection) {
          auto result = layer_forward(*current, *specs_[i], {cfg.criterion, cfg.compressor});
          out = std::move(result.map);
          selection = std::move(result.selection);
        } else {
          out = multimap_forward(*current, *specs_[i]);
        }
        break;
      case LayerType::maxpool:
        out = max_pool(*current, cfg.size, cfg.stride);
        break;
      case LayerType::meanpool:
        out = mean_pool(*current, cfg.size, cfg.stride);
        break;
    }
    trace.outputs.push_back(std::move(out));
    trace.selections.push_back(std::move(selection));
    current = &trace.outputs.back();
  }
  return trace;
}

}  // namespace ncdnet
