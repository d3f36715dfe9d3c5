#pragma once
// Placeholder during bring-up; the real CLI lands with the cli module.

namespace sageforge {
inline int cli_main(int, char**) { return 0; }
}  // namespace sageforge
