#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qforge {

enum class ErrorCode {
    DegenerateLattice,
    DimensionMismatch,
    BudgetExceeded,
    ArithmeticOverflow,
    InvalidPrime,
    ZeroArgument,
    RankMismatch,
    Inconsistent,
    SearchExhausted,
    NotFoundWithinBound,
    PoolExhausted,
    PreconditionViolation,
    UnsupportedLattice,
    AntiIsometryNotFound,
    NotIsometry,
    WrongSignature,
    NotMonic,
    IsotropicForm,
    NotBinary,
    BadInput,
    DegenerateDirection,
    InternalInconsistency,
    ParseError,
};

inline std::string_view to_string(ErrorCode c)
{
    switch (c) {
    case ErrorCode::DegenerateLattice: return "DegenerateLattice";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::ArithmeticOverflow: return "ArithmeticOverflow";
    case ErrorCode::InvalidPrime: return "InvalidPrime";
    case ErrorCode::ZeroArgument: return "ZeroArgument";
    case ErrorCode::RankMismatch: return "RankMismatch";
    case ErrorCode::Inconsistent: return "Inconsistent";
    case ErrorCode::SearchExhausted: return "SearchExhausted";
    case ErrorCode::NotFoundWithinBound: return "NotFoundWithinBound";
    case ErrorCode::PoolExhausted: return "PoolExhausted";
    case ErrorCode::PreconditionViolation: return "PreconditionViolation";
    case ErrorCode::UnsupportedLattice: return "UnsupportedLattice";
    case ErrorCode::AntiIsometryNotFound: return "AntiIsometryNotFound";
    case ErrorCode::NotIsometry: return "NotIsometry";
    case ErrorCode::WrongSignature: return "WrongSignature";
    case ErrorCode::NotMonic: return "NotMonic";
    case ErrorCode::IsotropicForm: return "IsotropicForm";
    case ErrorCode::NotBinary: return "NotBinary";
    case ErrorCode::BadInput: return "BadInput";
    case ErrorCode::DegenerateDirection: return "DegenerateDirection";
    case ErrorCode::InternalInconsistency: return "InternalInconsistency";
    case ErrorCode::ParseError: return "ParseError";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

// Process exit code used by the CLI: 2 precondition, 3 search exhausted,
// 4 a step the theory guarantees has failed.
inline int exit_code(ErrorCode c)
{
    switch (c) {
    case ErrorCode::BudgetExceeded:
    case ErrorCode::SearchExhausted:
    case ErrorCode::NotFoundWithinBound:
    case ErrorCode::PoolExhausted:
    case ErrorCode::AntiIsometryNotFound:
        return 3;
    case ErrorCode::InternalInconsistency:
        return 4;
    default:
        return 2;
    }
}

[[noreturn]] inline void fail(ErrorCode code, const std::string& what)
{
    throw Error(code, what);
}

} // namespace qforge
