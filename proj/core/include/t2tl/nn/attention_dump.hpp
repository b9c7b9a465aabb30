// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "t2tl/nn/encoders.hpp"

namespace t2tl::nn {

struct AttentionDumpRow {
  int layer = 0;
  int head = 0;
  int query_index = 0;
  std::string key_token;
  double weight = 0.0;
};

struct AttentionDump {
  std::string formula;
  std::string tag;
  std::vector<std::string> tokens;
  std::vector<AttentionDumpRow> rows;  // keys in position order within each query
};

AttentionDump make_attention_dump(const AttentionMap& map, const Vocab& vocab,
                                  const std::string& formula, const std::string& tag);

// Text format documented in docs/file-formats.md.
void write_attention_dump(std::ostream& out, const AttentionDump& dump);
AttentionDump read_attention_dump(std::istream& in);

// Largest |row sum - 1| over all (layer, head, query) rows; negative weights
// count as infinite error.
double max_row_error(const AttentionDump& dump);

// Total weight each key position receives at `layer`, summed over heads and
// queries.
std::vector<double> key_weight_totals(const AttentionDump& dump, int layer);

}  // namespace t2tl::nn
