/**
 * @file  errors.hpp
 * @brief Exception hierarchy shared by all kcsim modules.
 *
 * Every error carries a stable kind name and a process exit code so the CLI
 * can report failures as a single machine-parsable line.
 */
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kcsim {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    [[nodiscard]] virtual std::string_view kind() const noexcept = 0;
    [[nodiscard]] virtual int exit_code() const noexcept = 0;
};

#define KCSIM_DEFINE_ERROR(Name, Code)                                              \
    class Name : public Error {                                                     \
    public:                                                                         \
        using Error::Error;                                                         \
        [[nodiscard]] std::string_view kind() const noexcept override { return #Name; } \
        [[nodiscard]] int exit_code() const noexcept override { return Code; }      \
    };

// Exit codes are part of the CLI contract; do not renumber.
KCSIM_DEFINE_ERROR(ParseError, 2)
KCSIM_DEFINE_ERROR(ValidationError, 3)
KCSIM_DEFINE_ERROR(IoError, 4)
KCSIM_DEFINE_ERROR(NegativeStateError, 10)
KCSIM_DEFINE_ERROR(OddNodeCountError, 11)
KCSIM_DEFINE_ERROR(ResidualError, 12)
KCSIM_DEFINE_ERROR(ConsistencyError, 13)
KCSIM_DEFINE_ERROR(CflViolationError, 14)
KCSIM_DEFINE_ERROR(NegativityError, 15)
KCSIM_DEFINE_ERROR(StepSizeError, 16)
KCSIM_DEFINE_ERROR(RegimeError, 17)
KCSIM_DEFINE_ERROR(DegenerateFitError, 18)

#undef KCSIM_DEFINE_ERROR

}  // namespace kcsim
