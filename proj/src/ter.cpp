// Translation edit rate with greedy block shifts.
//
// Each round tries every move of a hypothesis block (up to kMaxShiftSize
// words, and only blocks that occur verbatim in the reference) to every other
// position, and applies the move that lowers the word edit distance the most.
// Rounds stop when no move helps. Every applied shift costs one edit.

#include <algorithm>
#include <set>
#include <unordered_map>

#include "parafuse/error.hpp"
#include "parafuse/lexical.hpp"

namespace parafuse::lexical {
namespace {

constexpr size_t kMaxShiftSize = 10;

size_t edit_distance(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<size_t> prev(b.size() + 1);
  std::vector<size_t> cur(b.size() + 1);
  for (size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (size_t j = 1; j <= b.size(); ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

}  // namespace

double ter(const TokenSeq& ref, const TokenSeq& hyp) {
  if (ref.empty()) throw InputError("ter: empty reference");

  std::unordered_map<std::string, int> ids;
  const auto encode = [&](const TokenSeq& seq) {
    std::vector<int> out;
    out.reserve(seq.size());
    for (const auto& t : seq) out.push_back(ids.try_emplace(t, static_cast<int>(ids.size())).first->second);
    return out;
  };
  const std::vector<int> r = encode(ref);
  std::vector<int> h = encode(hyp);

  std::set<std::vector<int>> ref_blocks;
  for (size_t i = 0; i < r.size(); ++i) {
    for (size_t len = 1; len <= kMaxShiftSize && i + len <= r.size(); ++len) {
      ref_blocks.emplace(r.begin() + i, r.begin() + i + len);
    }
  }

  size_t cost = edit_distance(r, h);
  size_t shifts = 0;
  std::vector<int> candidate;
  for (;;) {
    size_t best_cost = cost;
    std::vector<int> best;
    for (size_t start = 0; start < h.size(); ++start) {
      for (size_t len = 1; len <= kMaxShiftSize && start + len <= h.size(); ++len) {
        const std::vector<int> block(h.begin() + start, h.begin() + start + len);
        if (!ref_blocks.contains(block)) break;  // longer blocks contain this one
        std::vector<int> rest(h.begin(), h.begin() + start);
        rest.insert(rest.end(), h.begin() + start + len, h.end());
        for (size_t dest = 0; dest <= rest.size(); ++dest) {
          if (dest == start) continue;
          candidate.assign(rest.begin(), rest.begin() + dest);
          candidate.insert(candidate.end(), block.begin(), block.end());
          candidate.insert(candidate.end(), rest.begin() + dest, rest.end());
          const size_t c = edit_distance(r, candidate);
          if (c < best_cost) {
            best_cost = c;
            best = candidate;
          }
        }
      }
    }
    if (best.empty()) break;
    h = std::move(best);
    cost = best_cost;
    ++shifts;
  }
  return static_cast<double>(shifts + cost) / static_cast<double>(r.size());
}

}  // namespace parafuse::lexical
