#include "tasks.hpp"

#include <ostream>
#include <sstream>

#include "json.hpp"

namespace dlr {

namespace {

void check_spec(const TaskSpec& spec) {
  if (spec.kind != "mod_arith") {
    throw SpecError("unknown task kind '" + spec.kind + "'");
  }
  if (spec.modulus < 2) throw SpecError("modulus must be >= 2");
  if (spec.chain_length < 1) throw SpecError("chain_length must be >= 1");
}

// Operator pool. Kept to + and - so the desk-scale instance space stays small
// enough for the short-run learning studies; multiplication would blow up the
// number of distinct queries without changing what the pipeline exercises.
constexpr char kOps[] = {'+', '-'};

int64_t apply_op(char op, int64_t a, int64_t b) {
  return op == '+' ? a + b : a - b;
}

}  // namespace

TaskSpec task_spec_from(const RunConfig& cfg) {
  return TaskSpec{cfg.task_kind, cfg.modulus, cfg.chain_length};
}

TaskInstance generate_instance(const TaskSpec& spec, uint64_t seed) {
  check_spec(spec);
  SplitRng rng(split_seed(seed, "mod_arith"));

  const int m = spec.modulus;
  int64_t value = rng.uniform_int(m);
  std::string expr = std::to_string(value);
  for (int step = 0; step < spec.chain_length; ++step) {
    const char op = kOps[rng.uniform_int(int(sizeof(kOps)))];
    const int operand = rng.uniform_int(m);
    expr = "(" + expr + " " + op + " " + std::to_string(operand) + ")";
    value = apply_op(op, value, operand);
  }

  const int64_t residue = ((value % m) + m) % m;

  TaskInstance inst;
  inst.context = "Evaluate the arithmetic expression modulo " +
                 std::to_string(m) +
                 ". Reply with <think>...</think><answer>...</answer>.";
  inst.query = expr + " mod " + std::to_string(m);
  inst.ground_truth = std::to_string(residue);
  inst.answer_space_size = m;
  return inst;
}

namespace {

std::string_view trim(std::string_view s) {
  const char* ws = " \t\r\n";
  const size_t b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const size_t e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

size_t count_occurrences(std::string_view s, std::string_view needle) {
  size_t n = 0;
  for (size_t pos = s.find(needle); pos != std::string_view::npos;
       pos = s.find(needle, pos + 1)) {
    ++n;
  }
  return n;
}

}  // namespace

bool verify_answer(std::string_view decoded, std::string_view truth) {
  constexpr std::string_view open = "<answer>";
  constexpr std::string_view close = "</answer>";
  const size_t a = decoded.find(open);
  if (a == std::string_view::npos) return false;
  const size_t b = decoded.find(close, a + open.size());
  if (b == std::string_view::npos) return false;
  return trim(decoded.substr(a + open.size(), b - a - open.size())) == truth;
}

bool validate_structure(std::string_view decoded) {
  constexpr std::string_view think_open = "<think>";
  constexpr std::string_view think_close = "</think>";
  constexpr std::string_view answer_open = "<answer>";
  constexpr std::string_view answer_close = "</answer>";

  if (count_occurrences(decoded, think_open) != 1 ||
      count_occurrences(decoded, think_close) != 1 ||
      count_occurrences(decoded, answer_open) != 1 ||
      count_occurrences(decoded, answer_close) != 1) {
    return false;
  }
  if (decoded.substr(0, think_open.size()) != think_open) return false;
  const size_t tc = decoded.find(think_close);
  if (tc == std::string_view::npos || tc == think_open.size()) {
    return false;  // missing or empty think body
  }
  const size_t ao = tc + think_close.size();
  if (decoded.substr(ao, answer_open.size()) != answer_open) return false;
  const size_t ac = decoded.find(answer_close, ao);
  if (ac == std::string_view::npos || ac == ao + answer_open.size()) {
    return false;  // missing or empty answer body
  }
  return ac + answer_close.size() == decoded.size();
}

void export_instances_jsonl(const TaskSpec& spec, int n, uint64_t seed,
                            std::ostream& out) {
  check_spec(spec);
  for (int i = 0; i < n; ++i) {
    const TaskInstance inst = generate_instance(spec, split_seed(seed, "export", uint64_t(i)));
    nlohmann::ordered_json row;
    row["context"] = inst.context;
    row["query"] = inst.query;
    row["truth"] = inst.ground_truth;
    out << row.dump() << "\n";
  }
}

}  // namespace dlr
