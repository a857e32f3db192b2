#pragma once

#include <map>
#include <string>
#include <string_view>

namespace codezoom::prompts {

/// Text of the embedded template `resources/prompts/<name>.txt`.
/// Throws std::out_of_range for an unknown name.
std::string_view resource(std::string_view name);

/// Substitutes every `{{key}}` in `text`. A placeholder without a value is
/// an error (std::invalid_argument); values are inserted verbatim.
std::string fill(std::string_view text, const std::map<std::string, std::string>& values);

std::string fill_resource(std::string_view name, const std::map<std::string, std::string>& values);

/// `text` with a trailing newline added when missing (fence bodies).
std::string terminated(std::string text);

} // namespace codezoom::prompts
