#pragma once

#include <cstdlib>
#include <filesystem>
#include <string>

#include <doctest.h>

#include "codezoom/util.hpp"

namespace codezoom::testing {

inline std::filesystem::path fixture_path(const std::string& name)
{
    return std::filesystem::path(CODEZOOM_FIXTURES) / name;
}

inline std::string fixture(const std::string& name)
{
    auto path = fixture_path(name);
    REQUIRE_MESSAGE(std::filesystem::exists(path), "missing fixture " << name);
    return read_file(path);
}

/// Compares against fixtures/golden/<name>. With CODEZOOM_UPDATE_GOLDENS=1
/// in the environment the file is rewritten instead.
inline void check_golden(const std::string& name, const std::string& actual)
{
    auto path = fixture_path("golden/" + name);
    if (const char* update = std::getenv("CODEZOOM_UPDATE_GOLDENS"); update && std::string(update) == "1") {
        std::filesystem::create_directories(path.parent_path());
        write_file_atomic(path, actual);
        return;
    }
    REQUIRE_MESSAGE(std::filesystem::exists(path), "missing golden " << name);
    CHECK_MESSAGE(read_file(path) == actual, "golden mismatch: " << name);
}

inline std::filesystem::path scratch_dir(const std::string& name)
{
    auto dir = std::filesystem::temp_directory_path() / ("codezoom-" + name + "-" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace codezoom::testing
