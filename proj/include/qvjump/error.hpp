#pragma once

#include <stdexcept>
#include <string>

namespace qvjump {

// Every failure carries a short machine-readable category so the CLI can
// report it without parsing messages.
class Error : public std::runtime_error {
public:
    Error(std::string category, const std::string& what)
        : std::runtime_error(what), category_(std::move(category)) {}

    const std::string& category() const noexcept { return category_; }

private:
    std::string category_;
};

inline void require(bool ok, const char* category, const std::string& what)
{
    if (!ok) throw Error(category, what);
}

} // namespace qvjump
