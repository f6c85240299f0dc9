#pragma once

// Brute-force execution oracle for compliance: explores every run of a
// contract system and reports whether all of them complete. Independent of
// the synthesis algorithm; used to cross-check it.

#include "co2/contract.hpp"

#include <cstddef>
#include <string>

namespace co2 {

struct OracleVerdict {
    enum class Kind { AllRunsComplete, StuckConfig, CycleWithoutProgress, BudgetExhausted };

    Kind kind = Kind::AllRunsComplete;
    ContractSystem witness;
    std::string detail;
    std::size_t states = 0;

    bool complete() const { return kind == Kind::AllRunsComplete; }
};

// A system passes when
//  - runs with every queue capped at buffer_bound never reach a stuck,
//    non-terminated configuration, and no live participant can be starved
//    by a cycle of its connected peers;
//  - the same holds for synchronous runs (send and receive as one step).
OracleVerdict execution_oracle(const ContractSystem& t, std::size_t buffer_bound,
                               std::size_t state_budget = 200000);

const char* to_string(OracleVerdict::Kind k);

}  // namespace co2
