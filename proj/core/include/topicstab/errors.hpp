#pragma once

#include <stdexcept>
#include <string>

namespace topicstab {

// Input data is malformed, unreadable, or violates a pipeline precondition
// (empty vocabulary, zero row fed to a deterministic init, ...).
class data_error : public std::runtime_error {
  public:
    explicit data_error(const std::string& msg) : std::runtime_error(msg) {}
};

// A numerical routine failed (SVD did not converge, non-finite values, ...).
class numerical_error : public std::runtime_error {
  public:
    explicit numerical_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace topicstab
