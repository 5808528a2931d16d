#include "cryocav/errors.hpp"

namespace cryocav {

void require(bool condition, const std::string& what) {
  if (!condition) throw ValidationError(what);
}

} // namespace cryocav
