#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "ohmgrad/training.hpp"

namespace ohmgrad::cli {

struct TopologySpec {
  enum class Kind { none, grid, nanowire, file } kind = Kind::none;
  std::size_t rows = 0, cols = 0;
  std::size_t n = 0;
  double l = 0.3;
  std::uint64_t seed = 0;
  std::string path;
};

struct SelectorSpec {
  bool automatic = true;
  std::vector<std::size_t> input, output;
  std::size_t n_in = 0, n_out = 0;  // automatic only
  std::uint64_t seed = 0;
};

struct DataSpec {
  enum class Kind { regression, wdbc } kind = Kind::regression;
  std::size_t inputs = 2, outputs = 2;
  double sigma = 0.0;
  std::size_t count = 100;
  std::uint64_t seed = 0;
  std::string path;
  std::size_t pca = 3;
  double train_fraction = 0.8;
};

struct RunConfig {
  std::string command;
  TopologySpec topology;
  SelectorSpec selectors;
  bool selectors_given = false;
  DataSpec data;
  TrainConfig train;
  std::uint64_t seed = 0;
  std::string out = "out";
  std::size_t threads = 0;

  // freeze-sweep
  std::vector<double> p_list{0.0, 0.25, 0.5, 0.75, 1.0};
  std::size_t trials = 10;
  std::vector<Estimator> estimators;
  // bias-exp
  std::size_t samples = 10000;
  double noise_sigma = 3.0;
  // verify
  std::size_t graphs = 20;
  std::size_t max_nodes = 20;
  // landscape
  std::size_t resolution = 21;
  double range = 1.5;

  nlohmann::json source;  // merged input, echoed into meta.json
};

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> c{"gen", "train", "freeze-sweep", "bias-exp", "gep-verify", "verify", "landscape"};
  return c;
}

bool needs_topology(const std::string& command);

/// Validate a merged JSON configuration and fill defaults. Throws
/// Errc::config_error naming the offending key or value.
RunConfig parse_config(const nlohmann::json& j);

Estimator parse_estimator(const std::string& name);

/// "n=2,l=1.4,seed=7" -> {"n": 2, "l": 1.4, "seed": 7}
nlohmann::json parse_kv_list(const std::string& text);

/// "3x3" or "3,3" -> [3, 3]
nlohmann::json parse_grid(const std::string& text);

}  // namespace ohmgrad::cli
