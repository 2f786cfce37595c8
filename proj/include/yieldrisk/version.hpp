// Copyright 2026 The yieldrisk Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

namespace yieldrisk {

inline constexpr const char* kVersion = "0.3.0";
inline constexpr int kApiSchemaVersion = 1;

}  // namespace yieldrisk
