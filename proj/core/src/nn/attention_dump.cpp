// SPDX-License-Identifier: Apache-2.0
#include "t2tl/nn/attention_dump.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <tuple>
#include <ostream>
#include <sstream>

#include "t2tl/error.hpp"

namespace t2tl::nn {

namespace {
constexpr const char* kMagic = "# t2tl attention dump v1";
}

AttentionDump make_attention_dump(const AttentionMap& map, const Vocab& vocab,
                                  const std::string& formula, const std::string& tag) {
  AttentionDump dump;
  dump.formula = formula;
  dump.tag = tag;
  for (int id : map.ids) dump.tokens.push_back(vocab.token(id));
  for (int l = 0; l < map.layers; ++l) {
    for (int h = 0; h < map.heads; ++h) {
      const Mat& a = map.at(l, h);
      for (Eigen::Index q = 0; q < a.rows(); ++q) {
        for (Eigen::Index k = 0; k < a.cols(); ++k) {
          dump.rows.push_back({l, h, static_cast<int>(q), dump.tokens[static_cast<std::size_t>(k)], a(q, k)});
        }
      }
    }
  }
  return dump;
}

void write_attention_dump(std::ostream& out, const AttentionDump& dump) {
  out << kMagic << '\n';
  out << "# formula: " << dump.formula << '\n';
  out << "# tag: " << dump.tag << '\n';
  out << "# tokens:";
  for (const auto& t : dump.tokens) out << ' ' << t;
  out << '\n';
  out << "layer\thead\tquery_index\tkey_token\tweight\n";
  out << std::setprecision(17);
  for (const auto& r : dump.rows) {
    out << r.layer << '\t' << r.head << '\t' << r.query_index << '\t' << r.key_token << '\t'
        << r.weight << '\n';
  }
}

AttentionDump read_attention_dump(std::istream& in) {
  AttentionDump dump;
  std::string line;
  if (!std::getline(in, line) || line != kMagic) throw Error("not an attention dump");
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.rfind("# formula: ", 0) == 0) {
      dump.formula = line.substr(11);
    } else if (line.rfind("# tag: ", 0) == 0) {
      dump.tag = line.substr(7);
    } else if (line.rfind("# tokens:", 0) == 0) {
      std::istringstream toks(line.substr(9));
      std::string t;
      while (toks >> t) dump.tokens.push_back(t);
    } else if (!header_seen) {
      if (line != "layer\thead\tquery_index\tkey_token\tweight") {
        throw Error("attention dump column header missing");
      }
      header_seen = true;
    } else if (!line.empty()) {
      std::istringstream fields(line);
      AttentionDumpRow r;
      if (!(fields >> r.layer >> r.head >> r.query_index >> r.key_token >> r.weight)) {
        throw Error("malformed attention dump row: " + line);
      }
      dump.rows.push_back(r);
    }
  }
  return dump;
}

double max_row_error(const AttentionDump& dump) {
  std::map<std::tuple<int, int, int>, double> sums;
  for (const auto& r : dump.rows) {
    if (r.weight < 0.0 || !std::isfinite(r.weight)) return std::numeric_limits<double>::infinity();
    sums[{r.layer, r.head, r.query_index}] += r.weight;
  }
  double worst = 0.0;
  for (const auto& [k, s] : sums) worst = std::max(worst, std::abs(s - 1.0));
  return worst;
}

std::vector<double> key_weight_totals(const AttentionDump& dump, int layer) {
  std::vector<double> totals(dump.tokens.size(), 0.0);
  const std::size_t n = dump.tokens.size();
  std::size_t position = 0;
  for (const auto& r : dump.rows) {
    if (r.layer == layer) totals[position] += r.weight;
    position = (position + 1) % n;
  }
  return totals;
}

}  // namespace t2tl::nn
