#include "hbo/prior_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hbo/error.hpp"
#include "text_util.hpp"

namespace hbo {

using nlohmann::json;

void write_prior(std::ostream& out, const PriorSampleSet& prior) {
  const auto& p = prior.provenance;
  const json header{{"record", "header"},
                    {"kernel", std::string(prior.spec.name())},
                    {"M", prior.samples.size()},
                    {"H", p.H},
                    {"burn_in", p.burn_in},
                    {"B", p.B},
                    {"seed", p.seed},
                    {"tuning_hash", p.tuning_hash}};
  out << header.dump() << '\n';
  for (std::size_t i = 0; i < prior.samples.size(); ++i) {
    json theta = json::object();
    for (const auto& [name, value] : prior.samples[i].named()) theta[name] = value;
    out << json{{"record", "sample"}, {"index", i}, {"theta", std::move(theta)}}.dump() << '\n';
  }
}

PriorSampleSet read_prior(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  std::optional<PriorSampleSet> prior;
  std::size_t expected = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    try {
      const auto j = json::parse(line);
      const auto record = j.at("record").get<std::string>();
      if (record == "header") {
        PriorSampleSet p;
        p.spec = KernelSpec::from_name(j.at("kernel").get<std::string>());
        p.provenance.H = j.at("H").get<std::size_t>();
        p.provenance.burn_in = j.at("burn_in").get<std::size_t>();
        p.provenance.B = j.at("B").get<std::size_t>();
        p.provenance.seed = j.at("seed").get<std::uint64_t>();
        p.provenance.tuning_hash = j.at("tuning_hash").get<std::string>();
        expected = j.at("M").get<std::size_t>();
        prior = std::move(p);
      } else if (record == "sample") {
        if (!prior) fail(ErrorKind::Parse, source + ": sample before header");
        std::map<std::string, double> named;
        for (const auto& [name, value] : j.at("theta").items()) named[name] = value.get<double>();
        prior->samples.push_back(ThetaVector::from_named(prior->spec, named));
      } else {
        fail(ErrorKind::Parse, source + ": unknown record '" + record + "'");
      }
    } catch (const json::exception& e) {
      std::ostringstream os;
      os << source << ":" << line_no << ": " << e.what();
      fail(ErrorKind::Parse, os.str());
    }
  }
  if (!prior) fail(ErrorKind::Parse, source + ": missing header record");
  if (prior->samples.size() != expected) {
    std::ostringstream os;
    os << source << ": header announces " << expected << " samples, found " << prior->samples.size();
    fail(ErrorKind::Parse, os.str());
  }
  return std::move(*prior);
}

void save_prior(const std::filesystem::path& path, const PriorSampleSet& prior) {
  std::ostringstream os;
  write_prior(os, prior);
  detail::write_file_atomic(path, os.str());
}

PriorSampleSet load_prior(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Input, "cannot open prior " + path.string());
  return read_prior(in, path.string());
}

void write_chain_diagnostics(std::ostream& out, const ChainDiagnostics& diagnostics) {
  out << "iteration,slot,acceptance_rate,value\n";
  for (const auto& row : diagnostics.rows)
    out << row.iteration << ',' << row.slot << ',' << detail::format_double(row.acceptance_rate) << ','
        << detail::format_double(row.value) << '\n';
}

}  // namespace hbo
