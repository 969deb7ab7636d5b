#pragma once

#include <enkvote/runner.hpp>

#include <functional>

namespace enkvote {

/// TCP transport for the honest three-party run. Each role is a single
/// blocking loop, so one process (or thread) per party and no locks. Faulty
/// or dishonest behavior stays in the simulated runner, where every message
/// is scriptable; the socket path exists to show the protocol speaks over a
/// real network unchanged.
struct SocketEndpoint {
    std::string host = "127.0.0.1";
    std::uint16_t port = 0; // 0 lets the kernel pick; see on_listening
};

struct AdminServeOptions {
    Manifest manifest;
    AdminCredential credential;
    std::uint64_t seed = 0; // same seed as the other parties for a matched run
    SocketEndpoint listen;
    SocketEndpoint counter;
    int timeout_ms = 30000;
    std::function<void(std::uint16_t)> on_listening;      // reports the bound port
    std::function<void(std::size_t)> on_authenticated;    // after each accepted voter
};

/// Authenticate every voter, drive the delivery rounds, forward the published
/// board to all voters. Returns the export text.
std::string serve_admin(const AdminServeOptions& options);

struct CounterServeOptions {
    Manifest manifest;
    CounterCredential credential;
    std::uint64_t seed = 0;
    SocketEndpoint listen;
    int timeout_ms = 30000;
    std::function<void(std::uint16_t)> on_listening;
};

/// Serve the administrator connection until publication. Returns the export
/// text.
std::string serve_counter(const CounterServeOptions& options);

struct VoterRunOptions {
    Manifest manifest;
    VoterCredential credential;
    std::size_t choice = 1;
    std::uint64_t seed = 0;
    SocketEndpoint admin;
    int timeout_ms = 30000;
};

struct VoterRunResult {
    AuthOutcome auth = AuthOutcome::rejected_tampered;
    std::string export_text;
    VerifyOutcome verify = VerifyOutcome::missing;
    Receipt receipt;
};

/// Submit, answer the delivery, verify against the published board.
VoterRunResult run_voter(const VoterRunOptions& options);

} // namespace enkvote
