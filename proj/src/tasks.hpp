#pragma once

#include <iosfwd>
#include <string_view>

#include "core.hpp"

namespace dlr {

/// Synthetic verifiable task family. Answers live in {0 .. modulus-1},
/// rendered as decimal strings.
struct TaskSpec {
  std::string kind = "mod_arith";
  int modulus = 16;
  int chain_length = 1;  // number of arithmetic steps
};

TaskSpec task_spec_from(const RunConfig& cfg);

/// Deterministic in (spec, seed). The query renders a left-associated
/// arithmetic chain, e.g. "(5 + 9) mod 16" for chain_length 1.
TaskInstance generate_instance(const TaskSpec& spec, uint64_t seed);

/// True iff the content of the first <answer>...</answer> span, with
/// surrounding whitespace trimmed, is character-equal to `truth`. Total:
/// no span means false.
bool verify_answer(std::string_view decoded, std::string_view truth);

/// True iff `decoded` is exactly <think>B1</think><answer>B2</answer> with
/// nonempty bodies and each tag appearing exactly once.
bool validate_structure(std::string_view decoded);

/// One {"context":..., "query":..., "truth":...} object per line.
void export_instances_jsonl(const TaskSpec& spec, int n, uint64_t seed,
                            std::ostream& out);

}  // namespace dlr
