#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "hbo/kernels.hpp"
#include "hbo/mcmc.hpp"

namespace hbo::cli {

enum class Profile { Satellite, Station };

/// Everything a command needs. Defaults follow the satellite profile; the
/// station profile switches H to 2000 and n_init to 5 unless set explicitly.
struct RunConfig {
  Profile profile = Profile::Satellite;
  KernelFamily kernel = KernelFamily::RbfRbf;
  ChainConfig mcmc;

  struct Bo {
    std::size_t M = 100;
    std::size_t n_init = 10;
    std::size_t n_iter = 30;
    std::uint64_t seed = 13;
    std::size_t n_runs = 100;
  } bo;

  struct Data {
    /// "bundle", "grid" or "station".
    std::string format = "bundle";
    std::filesystem::path bundle;
    std::filesystem::path tuning;
    std::filesystem::path test;
    double cell_size_km = 7.0;
    std::size_t min_readings = 40;
    std::string classification = "Roadside";
  } data;

  struct Synth {
    std::size_t grid_size = 16;
    std::size_t n_snapshots = 20;
    /// 0 means half of n_snapshots.
    std::size_t n_tuning = 0;
    double cell_size_km = 7.0;
    double log_offset = 0.0;
    std::uint64_t seed = 13;
    /// "name=value,..." in the layout of `kernel`.
    std::string theta = "sigma_r1=1,l_r1=14,sigma_r2=1,l_r2=56";
  } synth;

  std::filesystem::path out_dir = "out";
  std::size_t jobs = 1;
};

/// Reads an INI file ([kernel] [mcmc] [bo] [data] [synth] [output]) on top
/// of the defaults. Unknown sections or keys are configuration errors.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(std::istream& in, const std::string& source = "<stream>");

/// Parses "name=value,name=value".
ThetaVector parse_theta(const KernelSpec& spec, const std::string& text);

/// Entry point; returns the process exit code (0 ok, 1 runtime/numerical
/// failure, 2 configuration/input error).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hbo::cli
