#include "scvd/errors.hpp"

namespace scvd {

namespace {

std::string join_lines(const std::string& head, const std::vector<std::string>& items) {
    std::string out = head;
    for (const auto& item : items) out += "\n  " + item;
    return out;
}

}  // namespace

AmbiguousTarget::AmbiguousTarget(const std::string& what, std::vector<std::string> signatures)
    : Error(join_lines(what + " is overloaded; pass a signature, one of:", signatures)),
      signatures_(std::move(signatures)) {}

StoreInvalid::StoreInvalid(std::vector<std::string> violations)
    : Error(join_lines("invalid example store:", violations)), violations_(std::move(violations)) {}

ManifestInvalid::ManifestInvalid(std::vector<std::string> violations)
    : Error(join_lines("invalid manifest:", violations)), violations_(std::move(violations)) {}

}  // namespace scvd
