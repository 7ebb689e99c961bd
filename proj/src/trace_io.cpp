#include "hbo/trace_io.hpp"

#include <map>
#include <ostream>
#include <sstream>

#include "hbo/error.hpp"
#include "text_util.hpp"

namespace hbo {

void write_trace_csv(std::ostream& out, const BoTrace& trace) {
  using detail::format_double;
  out << "iteration,x_km,y_km,value_raw,value_preprocessed,best_so_far,ess\n";
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const auto& s = trace.steps[i];
    out << (i + 1) << ',' << format_double(s.location.x()) << ',' << format_double(s.location.y()) << ','
        << format_double(s.value_raw) << ',' << format_double(s.value_pre) << ',' << format_double(s.best_so_far)
        << ',' << (s.ess ? format_double(*s.ess) : std::string()) << '\n';
  }
}

BoTrace read_trace_csv(std::istream& in, const Snapshot& snapshot, const std::string& source) {
  std::map<std::pair<double, double>, std::size_t> index;
  for (std::size_t i = 0; i < snapshot.size(); ++i)
    if (snapshot.mask[i]) index.emplace(std::make_pair(snapshot.locations[i].x(), snapshot.locations[i].y()), i);

  BoTrace trace;
  trace.snapshot_id = snapshot.id;
  std::string line;
  std::size_t line_no = 0;
  auto bad = [&](const std::string& what) {
    std::ostringstream os;
    os << source << ":" << line_no << ": " << what;
    fail(ErrorKind::Parse, os.str());
  };
  if (!std::getline(in, line)) bad("empty trace");
  ++line_no;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != 7) bad("expected 7 fields");
    const auto x = detail::parse_double(f[1]);
    const auto y = detail::parse_double(f[2]);
    if (!x || !y) bad("unparseable location");
    const auto it = index.find({*x, *y});
    if (it == index.end()) bad("location is not a candidate of snapshot " + snapshot.id);
    std::optional<double> ess;
    if (!f[6].empty()) {
      ess = detail::parse_double(f[6]);
      if (!ess) bad("unparseable ess");
    }
    append_step(trace, snapshot, it->second, ess);
  }
  return trace;
}

}  // namespace hbo
