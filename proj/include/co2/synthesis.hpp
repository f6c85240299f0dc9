#pragma once

// Compliance: synthesis of a global type from a closed system of contracts.

#include "co2/choreo.hpp"
#include "co2/contract.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <string>

namespace co2 {

struct SynthFailure {
    enum class Kind { Stuck, MixedRace, NotProjectable, Unbounded };

    Kind kind = Kind::Stuck;
    std::string detail;
    // Configuration where the descent gave up (empty for NotProjectable).
    ContractSystem config;
};

struct SynthResult {
    std::optional<GlobalType> global;
    std::optional<SynthFailure> failure;

    bool ok() const { return global.has_value(); }
};

struct SynthOptions {
    std::size_t budget = 10000;
};

// Throws Error when a queue is non-empty or a contract is open.
SynthResult synthesize(const ContractSystem& t, const SynthOptions& options = {});

bool compliant(const std::map<std::string, Contract>& contracts, const SynthOptions& options = {});

const char* to_string(SynthFailure::Kind k);

}  // namespace co2
