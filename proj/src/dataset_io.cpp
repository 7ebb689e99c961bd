#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "hbo/data.hpp"
#include "hbo/error.hpp"
#include "hbo/rng.hpp"
#include "text_util.hpp"

namespace hbo {
namespace {

using nlohmann::json;

constexpr int kFormatVersion = 1;

json doubles_to_json(const std::vector<double>& v) {
  json arr = json::array();
  for (double x : v) arr.push_back(std::isnan(x) ? json(nullptr) : json(x));
  return arr;
}

std::vector<double> doubles_from_json(const json& arr) {
  std::vector<double> out;
  out.reserve(arr.size());
  for (const auto& x : arr) out.push_back(x.is_null() ? std::numeric_limits<double>::quiet_NaN() : x.get<double>());
  return out;
}

json snapshot_to_json(const Snapshot& s, const char* split) {
  json locs = json::array();
  for (const auto& p : s.locations) locs.push_back({p.x(), p.y()});
  json mask = json::array();
  for (auto m : s.mask) mask.push_back(static_cast<int>(m));
  return json{{"record", "snapshot"},
              {"split", split},
              {"id", s.id},
              {"units", s.units},
              {"locations", std::move(locs)},
              {"values_raw", doubles_to_json(s.values_raw)},
              {"mask", std::move(mask)},
              {"values_pre", doubles_to_json(s.values_pre)}};
}

Snapshot snapshot_from_json(const json& j) {
  Snapshot s;
  s.id = j.at("id").get<std::string>();
  s.units = j.value("units", "");
  for (const auto& p : j.at("locations")) s.locations.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
  s.values_raw = doubles_from_json(j.at("values_raw"));
  for (const auto& m : j.at("mask")) s.mask.push_back(static_cast<std::uint8_t>(m.get<int>() != 0));
  s.values_pre = doubles_from_json(j.at("values_pre"));
  s.validate();
  return s;
}

void append_double(std::string& bytes, double v) {
  char buf[sizeof(double)];
  std::memcpy(buf, &v, sizeof(double));
  bytes.append(buf, sizeof(double));
}

}  // namespace

void write_dataset(std::ostream& out, const Dataset& dataset) {
  json meta{{"record", "meta"}, {"format", "hbo-dataset"}, {"version", kFormatVersion}};
  meta["stats"] = dataset.stats ? json{{"log_mean", dataset.stats->log_mean}, {"log_sd", dataset.stats->log_sd}}
                                : json(nullptr);
  meta["metadata"] = json::parse(dataset.metadata_json);
  out << meta.dump() << '\n';
  for (const auto& s : dataset.tuning) out << snapshot_to_json(s, "tuning").dump() << '\n';
  for (const auto& s : dataset.test) out << snapshot_to_json(s, "test").dump() << '\n';
}

Dataset read_dataset(std::istream& in, const std::string& source) {
  Dataset d;
  std::string line;
  std::size_t line_no = 0;
  bool have_meta = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    try {
      const auto j = json::parse(line);
      const auto record = j.at("record").get<std::string>();
      if (record == "meta") {
        if (j.at("format").get<std::string>() != "hbo-dataset")
          fail(ErrorKind::Parse, source + ": not a dataset bundle");
        if (!j.at("stats").is_null())
          d.stats = PreprocessStats{j["stats"].at("log_mean").get<double>(), j["stats"].at("log_sd").get<double>()};
        d.metadata_json = j.value("metadata", json::object()).dump();
        have_meta = true;
      } else if (record == "snapshot") {
        const auto split = j.at("split").get<std::string>();
        auto s = snapshot_from_json(j);
        if (split == "tuning") d.tuning.push_back(std::move(s));
        else if (split == "test") d.test.push_back(std::move(s));
        else fail(ErrorKind::Parse, source + ": unknown split '" + split + "'");
      } else {
        fail(ErrorKind::Parse, source + ": unknown record '" + record + "'");
      }
    } catch (const json::exception& e) {
      std::ostringstream os;
      os << source << ":" << line_no << ": " << e.what();
      fail(ErrorKind::Parse, os.str());
    }
  }
  if (!have_meta) fail(ErrorKind::Parse, source + ": missing meta record");
  if (d.stats) {
    for (const auto* split : {&d.tuning, &d.test})
      for (const auto& s : *split)
        if (!s.preprocessed()) fail(ErrorKind::Parse, source + ": snapshot " + s.id + " lacks pre-processed values");
  }
  return d;
}

void save_dataset(const std::filesystem::path& path, const Dataset& dataset) {
  std::ostringstream os;
  write_dataset(os, dataset);
  detail::write_file_atomic(path, os.str());
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Input, "cannot open dataset " + path.string());
  return read_dataset(in, path.string());
}

std::string tuning_hash(const Dataset& dataset) {
  std::string bytes;
  for (const auto& s : dataset.tuning) {
    bytes += s.id;
    bytes.push_back('\0');
    for (std::size_t i = 0; i < s.size(); ++i) {
      append_double(bytes, s.locations[i].x());
      append_double(bytes, s.locations[i].y());
      append_double(bytes, s.preprocessed() ? s.values_pre[i] : s.values_raw[i]);
    }
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << fnv1a(bytes);
  return os.str();
}

}  // namespace hbo
