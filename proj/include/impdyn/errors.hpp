#pragma once

#include <stdexcept>
#include <string>

namespace impdyn {

// Precondition violations and hard failures throw; expected dynamical
// outcomes (no return, grazing, boundary hits, solver divergence) are
// reported through status fields on result types.

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct DomainError : Error {
    explicit DomainError(const std::string& msg) : Error("domain: " + msg) {}
};

struct StepError : Error {
    explicit StepError(const std::string& msg) : Error("step: " + msg) {}
};

struct ChartError : Error {
    explicit ChartError(const std::string& msg) : Error("chart: " + msg) {}
};

struct SingularityError : Error {
    explicit SingularityError(const std::string& msg) : Error("singularity: " + msg) {}
};

struct IncompatibleSections : Error {
    explicit IncompatibleSections(const std::string& msg) : Error("sections: " + msg) {}
};

struct BudgetExceeded : Error {
    explicit BudgetExceeded(const std::string& msg) : Error("budget: " + msg) {}
};

struct SupportOutsideChart : Error {
    explicit SupportOutsideChart(const std::string& msg) : Error("support: " + msg) {}
};

struct BadParams : Error {
    explicit BadParams(const std::string& msg) : Error("params: " + msg) {}
};

struct UnknownExample : Error {
    explicit UnknownExample(const std::string& msg) : Error("example: " + msg) {}
};

struct ConstructionError : Error {
    explicit ConstructionError(const std::string& msg) : Error("construct: " + msg) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error("config: " + msg) {}
};

}  // namespace impdyn
