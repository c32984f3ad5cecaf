// Command-line front end. Exit codes: 0 success, 1 usage error, 2 data error.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ncdnet/compressor.hpp"
#include "ncdnet/error.hpp"
#include "ncdnet/experiment.hpp"
#include "ncdnet/image.hpp"
#include "ncdnet/matrix_io.hpp"
#include "ncdnet/ncd.hpp"
#include "ncdnet/ncd_layer.hpp"
#include "ncdnet/network.hpp"
#include "ncdnet/scaling.hpp"
#include "ncdnet/spectral.hpp"

namespace fs = std::filesystem;
using namespace ncdnet;

namespace {

constexpr int kUsage = 1;
constexpr int kData = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Bytes file_bytes(const fs::path& p) {
  const std::string s = read_file(p);
  return Bytes(s.begin(), s.end());
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") std::cout << text;
  else write_file(path, text);
}

std::string matrix_text(const Eigen::MatrixXd& m) {
  std::ostringstream out;
  write_matrix_csv(out, m);
  return out.str();
}

std::vector<int> parse_sizes(const std::string& list) {
  std::vector<int> out;
  std::istringstream in(list);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::logic_error&) {
      throw UsageError("bad size '" + tok + "'");
    }
  }
  return out;
}

std::string sanitize(std::string s) {
  std::replace(s.begin(), s.end(), ':', '_');
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compression-distance feature selection and spectral analysis"};
  app.require_subcommand(1);
  std::string compressor_name = "bzip";
  unsigned threads = 0;
  app.add_option("--compressor", compressor_name, "bzip, deflate or rle")->capture_default_str();
  app.add_option("--threads", threads, "worker threads, 0 = all cores");

  auto* ncd_cmd = app.add_subcommand("ncd", "NCD between two files");
  std::string file_a, file_b;
  ncd_cmd->add_option("fileA", file_a)->required();
  ncd_cmd->add_option("fileB", file_b)->required();

  auto* dist_cmd = app.add_subcommand("distmat", "pairwise NCD matrix of files");
  std::vector<std::string> dist_paths;
  std::string dist_out;
  dist_cmd->add_option("paths", dist_paths)->required();
  dist_cmd->add_option("--out", dist_out, "matrix CSV (default stdout)");

  auto* sel_cmd = app.add_subcommand("select", "NCD feature selection over the columns of a features CSV");
  std::string sel_features, sel_out, sel_matrix_out;
  double sel_criterion = kDefaultCriterion;
  sel_cmd->add_option("--features", sel_features)->required();
  sel_cmd->add_option("--criterion", sel_criterion)->capture_default_str();
  sel_cmd->add_option("--out", sel_out, "kept indices (default stdout)");
  sel_cmd->add_option("--matrix-out", sel_matrix_out, "distance matrix CSV (default <out>.matrix.csv)");

  auto* spec_cmd = app.add_subcommand("spectral", "spectral embedding and partition");
  std::string spec_matrix, spec_laplacian, spec_sigma = "auto", spec_out, spec_labels;
  int spec_k = 5;
  std::uint64_t spec_seed = 0;
  spec_cmd->add_option("--matrix", spec_matrix, "distance matrix CSV");
  spec_cmd->add_option("--laplacian", spec_laplacian, "prebuilt Laplacian CSV");
  spec_cmd->add_option("--sigma", spec_sigma, "kernel width or 'auto'")->capture_default_str();
  spec_cmd->add_option("--k", spec_k)->capture_default_str();
  spec_cmd->add_option("--seed", spec_seed)->capture_default_str();
  spec_cmd->add_option("--out", spec_out, "embedding CSV (default stdout)");
  spec_cmd->add_option("--labels", spec_labels, "labels CSV");

  auto* fwd_cmd = app.add_subcommand("forward", "run a network on one image and dump a layer");
  std::string fwd_config, fwd_image, fwd_out;
  std::size_t fwd_layer = 0;
  bool fwd_no_select = false;
  fwd_cmd->add_option("--config", fwd_config)->required();
  fwd_cmd->add_option("--image", fwd_image)->required();
  fwd_cmd->add_option("--dump-layer", fwd_layer)->required();
  fwd_cmd->add_option("--out", fwd_out, "tensor CSV (default stdout)");
  fwd_cmd->add_flag("--no-select", fwd_no_select, "pass every filter through ncd layers");

  auto* aug_cmd = app.add_subcommand("augment", "augment every PGM in a directory");
  std::string aug_in, aug_out, aug_ops;
  aug_cmd->add_option("--in", aug_in)->required();
  aug_cmd->add_option("--out", aug_out)->required();
  aug_cmd->add_option("--ops", aug_ops)->required();

  auto* exp_cmd = app.add_subcommand("experiment", "end-to-end experiment");
  std::string exp_config, exp_out;
  exp_cmd->add_option("--config", exp_config)->required();
  exp_cmd->add_option("--out", exp_out, "directory for report.txt, distance.csv, embedding.csv");

  auto* bench_cmd = app.add_subcommand("bench", "runtime scaling of distance_matrix and conv2d");
  std::string bench_sizes = "16,32,64,128", bench_conv = "32,64,128", bench_out;
  bench_cmd->add_option("--sizes", bench_sizes, "distance-matrix item counts")->capture_default_str();
  bench_cmd->add_option("--conv-sizes", bench_conv, "conv input widths")->capture_default_str();
  bench_cmd->add_option("--out", bench_out, "CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    CompressorId compressor;
    try {
      compressor = parse_compressor(compressor_name);
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    const DistanceOptions dist_opts{compressor, kDefaultNcdEpsilon, threads};

    if (*ncd_cmd) {
      std::cout.precision(6);
      std::cout << std::fixed << ncd_bytes(file_bytes(file_a), file_bytes(file_b), compressor) << '\n';
    } else if (*dist_cmd) {
      std::vector<Bytes> items;
      for (const auto& p : dist_paths) items.push_back(file_bytes(p));
      emit(dist_out, matrix_text(distance_matrix(items, dist_opts).matrix()));
    } else if (*sel_cmd) {
      std::ifstream in(sel_features);
      if (!in) throw Error(Errc::IoFailure, "cannot open " + sel_features);
      const auto columns = read_features_csv(in);
      const auto result = select_features(columns, {sel_criterion, compressor, kDefaultNcdEpsilon, threads});
      std::ostringstream out;
      out << "# kept=" << result.kept.size() << " full=" << columns.cols() << " criterion_used=" << result.criterion_used
          << " fallback_applied=" << (result.fallback_applied ? "true" : "false") << "\nindex\n";
      for (auto k : result.kept) out << k << '\n';
      emit(sel_out, out.str());
      std::string mpath = sel_matrix_out;
      if (mpath.empty() && !sel_out.empty() && sel_out != "-") {
        mpath = (fs::path(sel_out).parent_path() / (fs::path(sel_out).stem().string() + ".matrix.csv")).string();
      }
      if (!mpath.empty()) write_file(mpath, matrix_text(result.matrix.matrix()));
    } else if (*spec_cmd) {
      if (spec_matrix.empty() == spec_laplacian.empty()) throw UsageError("give exactly one of --matrix or --laplacian");
      double sigma = 0.0;
      if (spec_sigma != "auto") {
        try {
          sigma = std::stod(spec_sigma);
        } catch (const std::logic_error&) {
          throw UsageError("--sigma must be a number or 'auto'");
        }
        if (!(sigma > 0.0)) throw Error(Errc::BadSigma, "sigma must be > 0");
      }
      SpectralBundle<double> bundle;
      if (!spec_laplacian.empty()) {
        bundle = bundle_from_laplacian(load_matrix_csv(spec_laplacian));
      } else {
        const DistanceMatrix d(load_matrix_csv(spec_matrix));
        bundle = spectral_bundle(d.matrix(), sigma);
      }
      const auto embedding = embed_2d(bundle);
      const auto labels = partition(embedding, spec_k, spec_seed);
      std::ostringstream out;
      write_embedding_csv(out, embedding, labels);
      emit(spec_out, out.str());
      if (!spec_labels.empty()) {
        std::ostringstream lab;
        lab << "index,label\n";
        for (std::size_t i = 0; i < labels.size(); ++i) lab << i << ',' << labels[i] << '\n';
        write_file(spec_labels, lab.str());
      }
    } else if (*fwd_cmd) {
      const auto img = load_image(fwd_image);
      const Network net(load_network_config(fwd_config), img.height(), img.width(), 1);
      if (fwd_layer >= net.layer_count()) throw UsageError("--dump-layer out of range");
      const auto trace = net.forward(image_to_tensor(img), fwd_layer, !fwd_no_select);
      std::ostringstream out;
      write_tensor_csv(out, trace.outputs.back());
      emit(fwd_out, out.str());
      if (const auto& sel = trace.selections.back()) {
        std::cerr << "layer " << fwd_layer << ": kept " << sel->kept.size() << " filters, fallback_applied="
                  << (sel->fallback_applied ? "true" : "false") << '\n';
      }
    } else if (*aug_cmd) {
      std::vector<AugmentOp> ops;
      try {
        ops = parse_augment_ops(aug_ops);
      } catch (const Error& e) {
        throw UsageError(e.what());
      }
      if (!fs::is_directory(aug_in)) throw Error(Errc::IoFailure, "not a directory: " + aug_in);
      fs::create_directories(aug_out);
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(aug_in))
        if (e.is_regular_file() && e.path().extension() == ".pgm") files.push_back(e.path());
      std::sort(files.begin(), files.end());
      std::size_t written = 0;
      for (const auto& f : files) {
        const auto img = load_image(f);
        for (const auto& op : ops) {
          const auto outs = augment(img, op);
          for (std::size_t t = 0; t < outs.size(); ++t) {
            std::string name = f.stem().string() + "_" + sanitize(to_string(op));
            if (outs.size() > 1) name += "_" + std::to_string(t);
            save_pgm(fs::path(aug_out) / (name + ".pgm"), outs[t]);
            ++written;
          }
        }
      }
      std::cout << "wrote " << written << " images\n";
    } else if (*exp_cmd) {
      const auto cfg = load_experiment_config(exp_config);
      ExperimentArtifacts art;
      const auto report = run_experiment(cfg, &art);
      const std::string text = report.to_text();
      std::cout << text;
      if (!exp_out.empty()) {
        fs::create_directories(exp_out);
        write_file(fs::path(exp_out) / "report.txt", text);
        if (art.distance.size() > 0) write_file(fs::path(exp_out) / "distance.csv", matrix_text(art.distance));
        if (art.embedding.size() > 0) {
          std::ostringstream out;
          write_embedding_csv(out, art.embedding, art.labels);
          write_file(fs::path(exp_out) / "embedding.csv", out.str());
        }
      }
      return report.ok ? 0 : kData;
    } else if (*bench_cmd) {
      emit(bench_out, scaling_report(parse_sizes(bench_sizes), parse_sizes(bench_conv)).to_text());
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  }
  return 0;
}
