#include "mrp/data_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>
#include <stdexcept>
#include <sstream>
#include <string_view>
#include <unordered_map>

#include "mrp/error.hpp"

namespace mrp {

DiscretePanel::DiscretePanel(std::string group_label, std::size_t n, std::size_t p)
    : group_label_(std::move(group_label)), n_(n), p_(p), cells_(n * p) {
  sample_ids.reserve(n);
  for (std::size_t i = 0; i < n; ++i) sample_ids.push_back(std::to_string(i));
  dim_labels.reserve(p);
  for (std::size_t k = 0; k < p; ++k) dim_labels.push_back(std::to_string(k));
}

std::size_t DiscretePanel::min_observations() const {
  std::size_t out = cells_.empty() ? 0 : cells_.front().size();
  for (const auto& c : cells_) out = std::min(out, c.size());
  return out;
}

std::vector<Violation> validate_panel(const DiscretePanel& panel) {
  std::vector<Violation> out;
  if (panel.n() == 0 || panel.p() == 0) {
    out.push_back({0, 0, "panel must have at least one sample and one dimension"});
    return out;
  }
  for (std::size_t i = 0; i < panel.n(); ++i) {
    for (std::size_t k = 0; k < panel.p(); ++k) {
      const DiscreteCurve& c = panel.at(i, k);
      if (c.grid.size() != c.values.size()) {
        out.push_back({i, k, "grid and values differ in length"});
        continue;
      }
      if (c.grid.size() < 2) {
        out.push_back({i, k, "fewer than two observations"});
      }
      bool bad_domain = false;
      bool not_increasing = false;
      bool non_finite = false;
      for (std::size_t j = 0; j < c.grid.size(); ++j) {
        const double t = c.grid[j];
        if (!(t >= 0.0 && t <= 1.0)) bad_domain = true;
        if (j > 0 && !(t > c.grid[j - 1])) not_increasing = true;
        if (!std::isfinite(c.values[j])) non_finite = true;
      }
      if (bad_domain) out.push_back({i, k, "time point outside [0,1]"});
      if (not_increasing) out.push_back({i, k, "grid not increasing"});
      if (non_finite) out.push_back({i, k, "non-finite value"});
    }
  }
  return out;
}

namespace {

bool parse_integer_label(const std::string& s, long long& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

double parse_decimal(std::string_view s, std::size_t line, const char* field) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw InputError("line " + std::to_string(line) + ": cannot parse " + field + " '" +
                     std::string(s) + "'");
  }
  return v;
}

struct Observation {
  double t;
  double value;
};

// Rows of one group, keyed by interned sample and dimension labels.
struct GroupRows {
  std::unordered_map<std::string, std::size_t> sample_index;
  std::unordered_map<std::string, std::size_t> dim_index;
  std::vector<std::string> samples;
  std::vector<std::string> dims;
  std::map<std::pair<std::size_t, std::size_t>, std::vector<Observation>> cells;

  std::size_t intern(std::unordered_map<std::string, std::size_t>& index,
                     std::vector<std::string>& labels, std::string_view key) {
    auto [it, inserted] = index.try_emplace(std::string(key), labels.size());
    if (inserted) labels.emplace_back(key);
    return it->second;
  }
};

std::vector<std::size_t> sorted_order(const std::vector<std::string>& labels) {
  std::vector<std::size_t> order(labels.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return label_less(labels[a], labels[b]); });
  return order;
}

DiscretePanel assemble(const std::string& group, GroupRows& rows,
                       const std::vector<std::string>& dims_sorted) {
  const auto sample_order = sorted_order(rows.samples);
  DiscretePanel panel(group, rows.samples.size(), dims_sorted.size());
  for (std::size_t i = 0; i < sample_order.size(); ++i) {
    panel.sample_ids[i] = rows.samples[sample_order[i]];
  }
  panel.dim_labels = dims_sorted;

  for (std::size_t i = 0; i < sample_order.size(); ++i) {
    const std::size_t s = sample_order[i];
    for (std::size_t k = 0; k < dims_sorted.size(); ++k) {
      const std::size_t d = rows.dim_index.at(dims_sorted[k]);
      auto it = rows.cells.find({s, d});
      if (it == rows.cells.end()) {
        throw InputError("missing cell: group " + group + ", sample " + rows.samples[s] +
                         ", dim " + dims_sorted[k]);
      }
      auto& obs = it->second;
      std::sort(obs.begin(), obs.end(),
                [](const Observation& a, const Observation& b) { return a.t < b.t; });
      DiscreteCurve& curve = panel.at(i, k);
      curve.grid.reserve(obs.size());
      curve.values.reserve(obs.size());
      for (std::size_t j = 0; j < obs.size(); ++j) {
        if (j > 0 && obs[j].t == obs[j - 1].t) {
          throw InputError("duplicate (group,sample,dim,t) row: group " + group + ", sample " +
                           rows.samples[s] + ", dim " + dims_sorted[k]);
        }
        curve.grid.push_back(obs[j].t);
        curve.values.push_back(obs[j].value);
      }
    }
  }

  const auto violations = validate_panel(panel);
  if (!violations.empty()) {
    const Violation& v = violations.front();
    throw InputError("invalid panel: group " + group + ", sample " + panel.sample_ids[v.sample] +
                     ", dim " + panel.dim_labels[v.dim] + ": " + v.message);
  }
  return panel;
}

std::string shortest(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

bool label_less(const std::string& a, const std::string& b) {
  long long ia = 0;
  long long ib = 0;
  const bool na = parse_integer_label(a, ia);
  const bool nb = parse_integer_label(b, ib);
  if (na && nb && ia != ib) return ia < ib;
  if (na != nb) return na;  // numeric labels first
  return a < b;
}

namespace {

void parse_rows(std::istream& in, GroupRows (&groups)[2]) {
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::string_view rest(text);

  std::size_t line_no = 0;
  bool header_seen = false;

  while (!rest.empty()) {
    const std::size_t eol = rest.find('\n');
    std::string_view line = rest.substr(0, eol);
    rest = eol == std::string_view::npos ? std::string_view{} : rest.substr(eol + 1);
    ++line_no;
    if (trim(line).empty()) continue;

    std::string_view fields[5];
    std::size_t count = 0;
    std::string_view cursor = line;
    while (true) {
      const std::size_t comma = cursor.find(',');
      if (count == 5) {
        count = 6;
        break;
      }
      fields[count++] = trim(cursor.substr(0, comma));
      if (comma == std::string_view::npos) break;
      cursor = cursor.substr(comma + 1);
    }
    if (count != 5) {
      throw InputError("line " + std::to_string(line_no) + ": expected 5 comma-separated fields");
    }

    if (!header_seen) {
      if (fields[0] != "group" || fields[1] != "sample_id" || fields[2] != "dim" ||
          fields[3] != "t" || fields[4] != "value") {
        throw InputError("line " + std::to_string(line_no) +
                         ": header must be group,sample_id,dim,t,value");
      }
      header_seen = true;
      continue;
    }

    int g = -1;
    if (fields[0] == "X") g = 0;
    if (fields[0] == "Y") g = 1;
    if (g < 0) {
      throw InputError("line " + std::to_string(line_no) + ": group must be X or Y, got '" +
                       std::string(fields[0]) + "'");
    }
    if (fields[1].empty() || fields[2].empty()) {
      throw InputError("line " + std::to_string(line_no) + ": empty sample_id or dim");
    }
    const double t = parse_decimal(fields[3], line_no, "t");
    const double value = parse_decimal(fields[4], line_no, "value");

    GroupRows& rows = groups[g];
    const std::size_t s = rows.intern(rows.sample_index, rows.samples, fields[1]);
    const std::size_t d = rows.intern(rows.dim_index, rows.dims, fields[2]);
    rows.cells[{s, d}].push_back({t, value});
  }

  if (!header_seen) throw InputError("empty input: missing header");
}

}  // namespace

PanelPair load_long_csv(std::istream& in) {
  GroupRows groups[2];
  parse_rows(in, groups);
  for (int g = 0; g < 2; ++g) {
    if (groups[g].samples.empty()) {
      throw InputError(std::string("group ") + (g == 0 ? "X" : "Y") + " has no rows");
    }
  }

  std::vector<std::string> dims_x = groups[0].dims;
  std::vector<std::string> dims_y = groups[1].dims;
  std::sort(dims_x.begin(), dims_x.end(), label_less);
  std::sort(dims_y.begin(), dims_y.end(), label_less);
  if (dims_x != dims_y) throw InputError("dimension mismatch between groups");

  return {assemble("X", groups[0], dims_x), assemble("Y", groups[1], dims_x)};
}

DiscretePanel load_group_csv(std::istream& in, const std::string& group) {
  if (group != "X" && group != "Y") throw std::invalid_argument("group must be X or Y");
  GroupRows groups[2];
  parse_rows(in, groups);
  GroupRows& rows = groups[group == "X" ? 0 : 1];
  if (rows.samples.empty()) throw InputError("group " + group + " has no rows");
  std::vector<std::string> dims = rows.dims;
  std::sort(dims.begin(), dims.end(), label_less);
  return assemble(group, rows, dims);
}

DiscretePanel load_group_csv(const std::filesystem::path& path, const std::string& group) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  return load_group_csv(in, group);
}

PanelPair load_long_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  return load_long_csv(in);
}

void write_long_csv(std::ostream& out, const DiscretePanel& x, const DiscretePanel& y) {
  out << "group,sample_id,dim,t,value\n";
  for (const DiscretePanel* panel : {&x, &y}) {
    const char* g = panel == &x ? "X" : "Y";
    for (std::size_t i = 0; i < panel->n(); ++i) {
      for (std::size_t k = 0; k < panel->p(); ++k) {
        const DiscreteCurve& c = panel->at(i, k);
        for (std::size_t j = 0; j < c.size(); ++j) {
          out << g << ',' << panel->sample_ids[i] << ',' << panel->dim_labels[k] << ','
              << shortest(c.grid[j]) << ',' << shortest(c.values[j]) << '\n';
        }
      }
    }
  }
}

void write_long_csv(const std::filesystem::path& path, const DiscretePanel& x,
                    const DiscretePanel& y) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  write_long_csv(out, x, y);
}

}  // namespace mrp
