#include "vulnforge/errors.hpp"

#include <utility>

namespace vulnforge {

Error::Error(std::string kind, const std::string& message)
    : std::runtime_error(message), kind_(std::move(kind)) {}

}  // namespace vulnforge
