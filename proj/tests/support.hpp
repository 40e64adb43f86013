#pragma once

#include <string>

#include "preskit/io.hpp"
#include "preskit/orbits.hpp"

namespace testutil {

inline std::string fixture_path(const std::string& name) {
    return std::string(PRESKIT_FIXTURE_DIR) + "/" + name;
}

inline preskit::FiniteStructure load_fixture(const std::string& name) {
    return preskit::load_structure(preskit::read_file(fixture_path(name)));
}

inline preskit::Property load_fixture_property(const std::string& name) {
    return preskit::load_property(preskit::read_file(fixture_path(name)));
}

// Expensive internal cross-checks stay on throughout the test binaries.
inline const bool self_check_on = [] {
    preskit::self_check_enabled() = true;
    return true;
}();

} // namespace testutil
