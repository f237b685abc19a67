// Copyright 2026 The yyrf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <yyrf/field.hpp>
#include <yyrf/image.hpp>

#include <cstdint>
#include <string>

namespace yyrf {

inline constexpr uint32_t kCheckpointVersion = 1;

/// Load failure with the byte offset at which the problem was detected.
class CheckpointError : public IoError
{
public:
    CheckpointError(const std::string &what, uint64_t offset)
        : IoError(what + " (at byte offset " + std::to_string(offset) + ")"), mOffset(offset)
    {
    }
    uint64_t offset() const { return mOffset; }

private:
    uint64_t mOffset;
};

/// Writes the field atomically (temporary file + rename). metadata must be a
/// JSON document; it is stored verbatim.
void saveCheckpoint(const RadianceField &field, const std::string &path, const std::string &metadata = "{}");

struct LoadedCheckpoint
{
    RadianceField field;
    std::string metadata;
};

LoadedCheckpoint loadCheckpoint(const std::string &path);

/// As loadCheckpoint, but rejects a file whose grid geometry differs from expected.
LoadedCheckpoint loadCheckpoint(const std::string &path, const GridConfig &expected);

} // namespace yyrf
