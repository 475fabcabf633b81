#pragma once

#include <stdexcept>
#include <string>

namespace cirl {

// Typed construction/usage errors. Each names the contract it enforces;
// generic misuse (bad dimensions, null sizes) uses std::invalid_argument.

struct InvalidKernelRow : std::runtime_error {
    explicit InvalidKernelRow(const std::string& what) : std::runtime_error(what) {}
};

struct NonAbsorbing : std::runtime_error {
    explicit NonAbsorbing(const std::string& what) : std::runtime_error(what) {}
};

struct SizeGuard : std::runtime_error {
    explicit SizeGuard(const std::string& what) : std::runtime_error(what) {}
};

struct EnumerationMismatch : std::runtime_error {
    explicit EnumerationMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct EmptyDataset : std::runtime_error {
    explicit EmptyDataset(const std::string& what) : std::runtime_error(what) {}
};

struct GroupTooSmall : std::runtime_error {
    explicit GroupTooSmall(const std::string& what) : std::runtime_error(what) {}
};

struct SnapshotMismatch : std::runtime_error {
    explicit SnapshotMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct MissingAnswerStructure : std::runtime_error {
    explicit MissingAnswerStructure(const std::string& what) : std::runtime_error(what) {}
};

} // namespace cirl
