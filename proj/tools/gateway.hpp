// Copyright 2026 The survey-bench Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Live gateway for `survey-bench run --listen`. One port carries three
// things: raw TCP clients speaking the line protocol, WebSocket clients
// (one protocol message per text frame), and plain HTTP GETs for static
// console assets. Exactly one controller (line or WebSocket) at a time.

#pragma once

#include <functional>
#include <string>
#include <vector>

namespace gateway {

struct Options {
    std::string address = "127.0.0.1:8765";
    std::string static_dir;  // empty disables static serving
    int tick_hz = 50;
};

struct Hooks {
    // Applies one inbound protocol line; returns outbound lines.
    std::function<std::vector<std::string>(const std::string&)> apply;
    // Advances the session one tick; returns outbound lines.
    std::function<std::vector<std::string>()> tick;
    // True once the session has ended and the gateway should stop.
    std::function<bool()> finished;
    // Called with the bound "host:port" once listening.
    std::function<void(const std::string&)> on_listen;
};

// Serves until the session ends or SIGINT/SIGTERM arrives. Returns 0 on a
// clean stop, non-zero if the socket could not be set up (message in
// `error`).
int serve(const Options& options, const Hooks& hooks, std::string* error);

// Exposed for tests.
std::string websocket_accept_key(const std::string& client_key);

}  // namespace gateway
