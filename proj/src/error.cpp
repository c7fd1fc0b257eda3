#include "mvh/error.hpp"

namespace mvh {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Parse: return "parse error";
        case ErrorKind::Vocabulary: return "vocabulary error";
        case ErrorKind::Duplicate: return "duplication error";
        case ErrorKind::Coverage: return "coverage error";
        case ErrorKind::Alignment: return "alignment error";
        case ErrorKind::Aggregation: return "aggregation error";
        case ErrorKind::Parameter: return "parameter error";
        case ErrorKind::Undefined: return "undefined value";
        case ErrorKind::Numeric: return "numeric error";
        case ErrorKind::Capacity: return "capacity error";
        case ErrorKind::Io: return "i/o error";
    }
    return "error";
}

int exit_code(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Parameter:
            return 2;
        case ErrorKind::Parse:
        case ErrorKind::Vocabulary:
        case ErrorKind::Duplicate:
        case ErrorKind::Coverage:
        case ErrorKind::Alignment:
        case ErrorKind::Aggregation:
        case ErrorKind::Io:
            return 3;
        case ErrorKind::Undefined:
        case ErrorKind::Numeric:
            return 4;
        case ErrorKind::Capacity:
            return 5;
    }
    return 1;
}

}  // namespace mvh
