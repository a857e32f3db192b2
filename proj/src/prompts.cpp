#include "codezoom/prompts.hpp"

#include <stdexcept>

namespace codezoom::prompts {

namespace detail {
const std::map<std::string, std::string_view, std::less<>>& table();
}

std::string_view resource(std::string_view name)
{
    const auto& t = detail::table();
    auto it = t.find(name);
    if (it == t.end())
        throw std::out_of_range("no prompt resource named " + std::string(name));
    return it->second;
}

std::string fill(std::string_view text, const std::map<std::string, std::string>& values)
{
    std::string out;
    std::size_t pos = 0;
    while (true) {
        auto open = text.find("{{", pos);
        if (open == std::string_view::npos)
            break;
        auto close = text.find("}}", open + 2);
        if (close == std::string_view::npos)
            break;
        std::string key(text.substr(open + 2, close - open - 2));
        auto it = values.find(key);
        if (it == values.end())
            throw std::invalid_argument("template placeholder {{" + key + "}} has no value");
        out.append(text.substr(pos, open - pos));
        out += it->second;
        pos = close + 2;
    }
    out.append(text.substr(pos));
    return out;
}

std::string fill_resource(std::string_view name, const std::map<std::string, std::string>& values)
{
    return fill(resource(name), values);
}

std::string terminated(std::string text)
{
    if (text.empty() || text.back() != '\n')
        text += '\n';
    return text;
}

} // namespace codezoom::prompts
