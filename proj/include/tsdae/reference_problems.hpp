#pragma once

// The two worked examples, embedded so that `tsdae selftest` needs no files.
// fixtures/example1.json and fixtures/example2.json hold the same documents;
// a unit test keeps them in sync.

#include <tsdae/problem.hpp>

#include <string_view>

namespace tsdae::reference {

/// Standard form on the integers 0..20. The projector P is idempotent but its
/// kernel is not ker A, so A P = A fails at entry (3,2); see
/// fixtures/example1_corrected_note.md.
inline constexpr std::string_view example1_json = R"json({
  "form": "standard",
  "timescale": {"kind": "integer-range", "start": 0, "end": 20},
  "dimensions": {"n": 3, "m": 3},
  "A": [["-1", "t+1", "-1"],
        ["0", "0", "0"],
        ["0", "2*t+2", "-1"]],
  "C": [["0", "0", "1"],
        ["0", "-t", "1"],
        ["0", "2", "1"]],
  "P": [["1", "0", "0"],
        ["0", "0", "0"],
        ["0", "-(t+1)", "1"]],
  "f": ["0", "0", "0"],
  "initial": {"t0": 0, "x0": [1, 1, 1]}
}
)json";

/// Properly stated form on {1, 2, 4, ..., 1024}: n = 5, m = 3, index one with
/// det G1(t) = -t^10.
inline constexpr std::string_view example2_json = R"json({
  "form": "proper-stated",
  "timescale": {"kind": "geometric", "base": 2, "start": 1, "count": 11},
  "dimensions": {"n": 5, "m": 3},
  "A": [["t", "0", "0"],
        ["0", "1", "0"],
        ["0", "0", "t^2"],
        ["0", "0", "0"],
        ["0", "0", "0"]],
  "B": [["t", "0", "0", "0", "0"],
        ["0", "t^2", "0", "0", "0"],
        ["0", "0", "1", "0", "0"]],
  "C": [["0", "0", "0", "-1", "1"],
        ["0", "0", "t", "1", "0"],
        ["0", "-1", "0", "0", "0"],
        ["-1", "1", "0", "-t^2", "0"],
        ["1", "0", "0", "0", "t^2"]],
  "f": ["1", "0", "0", "0", "0"],
  "initial": {"t0": 1, "x0": [1, 1, 1, 0, 0]}
}
)json";

inline ProblemSpec example1() { return parse_problem_text(std::string(example1_json)); }
inline ProblemSpec example2() { return parse_problem_text(std::string(example2_json)); }

}  // namespace tsdae::reference
