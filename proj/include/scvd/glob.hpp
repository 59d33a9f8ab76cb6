#pragma once

#include <string_view>

namespace scvd {

/// Matches a `/`-separated relative path against a glob. `*` and `?` stay
/// inside one segment; a `**` segment matches zero or more whole segments.
bool glob_match(std::string_view pattern, std::string_view path);

}  // namespace scvd
