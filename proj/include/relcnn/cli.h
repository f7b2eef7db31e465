#ifndef RELCNN_CLI_H_
#define RELCNN_CLI_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace relcnn {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,      // runtime failure (bad data, training error)
  kExitUsage = 2,        // unknown flag or malformed arguments
  kExitMissingFile = 3,  // a referenced input path does not exist
  kExitBadConfig = 4,    // values outside their allowed ranges
};

// Every setting a run can resolve. JSON keys equal the flag names.
struct RunConfig {
  std::string command;
  std::string corpus;
  std::string embeddings;
  std::string out = "out";
  std::string model;
  std::string vocab;
  std::vector<int> filters = {4, 6};
  int num_filters = 100;
  double dropout = 0.5;  // keep-probability during training
  int batch_size = 50;
  int epochs = 20;
  double lr = 1e-3;
  std::uint64_t seed = 1;
  int jobs = 1;
  int folds = 5;
  int patience = 0;  // 0 disables early stopping
  double negative_keep = 1.0;
  int position_clip = 50;
  std::vector<std::vector<int>> length_sets = {
      {3}, {4}, {5}, {6}, {7}, {3, 4}, {3, 5}, {4, 5}, {4, 6}, {5, 6},
      {3, 4, 5}, {4, 5, 6}, {2, 3, 4, 5}, {3, 4, 5, 6}};
  std::vector<double> costs = {0.01, 0.1, 1.0};
  int svm_epochs = 20;
  int sentences = 500;
  int entities = 2;
};

nlohmann::ordered_json to_json(const RunConfig& config);
// Overrides the fields named in `j`; unknown keys are rejected.
void apply_json(RunConfig& config, const nlohmann::json& j);

// Entry point behind the relcnn executable; args exclude the program name.
int run_cli(std::span<const std::string> args, std::ostream& out,
            std::ostream& err);

}  // namespace relcnn

#endif  // RELCNN_CLI_H_
