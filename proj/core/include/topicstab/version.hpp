#pragma once

namespace topicstab {

inline constexpr const char* kVersion = "0.1.0";

} // namespace topicstab
