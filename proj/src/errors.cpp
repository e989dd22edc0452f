#include "qc/errors.hpp"

#include <sstream>

namespace qc {

namespace {

std::string describe_volume(double v) {
    std::ostringstream os;
    os.precision(10);
    os << "volume " << v << " matches neither the thin nor the fat cell";
    return os.str();
}

std::string describe_weld(std::size_t id, double tol) {
    std::ostringstream os;
    os << "weld tolerance " << tol << " collapses vertices of cell " << id;
    return os.str();
}

std::string locate(const std::string& what, const SourceLocation& at) {
    std::ostringstream os;
    os << what;
    if (at.line != 0) {
        os << " (line " << at.line << ", column " << at.column;
        if (at.record != 0) os << ", record " << at.record;
        os << ", token " << at.token << ")";
    } else if (at.column != 0) {
        os << " (byte " << at.column << ")";
    } else if (at.record != 0) {
        os << " (cell " << at.record << ")";
    }
    return os.str();
}

}  // namespace

UnclassifiableVolume::UnclassifiableVolume(double volume)
    : Error(describe_volume(volume)), volume_(volume) {}

WeldToleranceTooCoarse::WeldToleranceTooCoarse(std::size_t cell_id, double tolerance)
    : Error(describe_weld(cell_id, tolerance)), cell_id_(cell_id) {}

ParseError::ParseError(const std::string& what, SourceLocation where)
    : Error(locate(what, where)), where_(where) {}

}  // namespace qc
