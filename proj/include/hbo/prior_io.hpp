#pragma once

// JSON-lines storage for prior samples plus CSV chain diagnostics.
//
//   {"record":"header","kernel":"RbfRbf","M":100,"H":1200,"burn_in":200,"B":5,"seed":13,"tuning_hash":"..."}
//   {"record":"sample","index":0,"theta":{"l_r1":...,"noise":1e-06,...}}

#include <filesystem>
#include <iosfwd>

#include "hbo/mcmc.hpp"

namespace hbo {

void write_prior(std::ostream& out, const PriorSampleSet& prior);
PriorSampleSet read_prior(std::istream& in, const std::string& source = "<stream>");
void save_prior(const std::filesystem::path& path, const PriorSampleSet& prior);
PriorSampleSet load_prior(const std::filesystem::path& path);

/// iteration,slot,acceptance_rate,value
void write_chain_diagnostics(std::ostream& out, const ChainDiagnostics& diagnostics);

}  // namespace hbo
