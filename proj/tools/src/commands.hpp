#pragma once

// The vecgee subcommands as plain functions, so tests can drive them without
// spawning a process. Each returns normally on success and throws a
// vecgee::Error otherwise; exit_code() maps errors to the process status.

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace vecgee::cli {

struct FitArgs {
  std::filesystem::path spec;
  std::string data;  // CSV path or "builtin:sorbinil"
  std::optional<std::string> working;
  std::filesystem::path out;
  std::string missing_token = "NA";
  std::optional<std::filesystem::path> export_external;  // prefix for _means.csv / _wcov.csv
};

struct TestArgs {
  std::filesystem::path fit;
  std::filesystem::path contrast;
  std::string variance = "sandwich";  // naive | sandwich | both
};

struct RegionArgs {
  std::filesystem::path fit;
  std::string pair;                   // "a,b"
  std::string levels = "0.95,0.99";
  int grid = 200;
  std::string variance = "both";
  std::optional<std::filesystem::path> out;
};

struct SimulateArgs {
  std::filesystem::path config;
  std::filesystem::path out;
  std::optional<std::filesystem::path> age_pool;
  unsigned threads = 1;
};

struct AdjustArgs {
  std::filesystem::path means;
  std::filesystem::path wcov;
  std::string link = "logit";
  std::optional<std::filesystem::path> estimates;
  std::filesystem::path out;
};

void run_fit(const FitArgs& args, std::ostream& log);
void run_test(const TestArgs& args, std::ostream& log);
void run_region(const RegionArgs& args, std::ostream& log, std::ostream& warn);
void run_simulate(const SimulateArgs& args, std::ostream& log);
void run_adjust(const AdjustArgs& args, std::ostream& log);

/// VECGEE_THREADS, default 1.
unsigned threads_from_environment();

/// 0 success, 2 configuration, 3 numerical, 4 I/O.
int exit_code(const std::exception& error);

}  // namespace vecgee::cli
