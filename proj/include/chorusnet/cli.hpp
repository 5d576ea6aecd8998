#pragma once

namespace chorusnet {

// Entry point of the chorusnet tool (topology | run | analyze | report).
// Exit codes: 0 success, 2 usage or config error, 1 runtime error.
int cli_main(int argc, const char* const* argv);

} // namespace chorusnet
