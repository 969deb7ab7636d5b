#pragma once

#include <enkvote/wire.hpp>

#include <functional>
#include <map>
#include <string>

namespace enkvote {

/// What the network does to one delivery.
struct FaultPlan {
    enum class Kind : std::uint8_t { none, drop, tamper, delay, duplicate };

    Kind kind = Kind::none;
    std::size_t bit_position = 0; // tamper: which body bit flips
    std::uint32_t ticks = 0;      // delay: virtual time added before delivery

    static FaultPlan none() { return {}; }
    static FaultPlan drop() { return {Kind::drop, 0, 0}; }
    static FaultPlan tamper(std::size_t bit) { return {Kind::tamper, bit, 0}; }
    static FaultPlan delay(std::uint32_t ticks) { return {Kind::delay, 0, ticks}; }
    static FaultPlan duplicate() { return {Kind::duplicate, 0, 0}; }
};

struct LogEntry {
    std::uint64_t tick = 0;
    std::string from;
    std::string to;
    MsgType type = MsgType::announce;
    std::string digest; // short keyed digest of the frame, for matching runs
    std::string note;   // fault or handler remark, empty when clean
};

class RunLog {
public:
    void add(LogEntry entry) { entries_.push_back(std::move(entry)); }
    const std::vector<LogEntry>& entries() const { return entries_; }
    std::string text() const;

private:
    std::vector<LogEntry> entries_;
};

/// In-process message fabric with a virtual clock. Parties are registered
/// handlers; deliveries pass through the fault plan, so drops, bit flips,
/// delays and replays are all scriptable per message.
class SimBus {
public:
    using Handler = std::function<void(const Envelope&)>;

    void register_endpoint(const std::string& name, Handler handler);
    bool has_endpoint(const std::string& name) const;

    struct Outcome {
        bool delivered = false;    // reached the handler at least once
        std::size_t deliveries = 0; // 2 under duplicate
        std::uint64_t tick = 0;     // virtual time after this call
    };

    /// UnknownEndpointError when `to` was never registered.
    Outcome deliver(const std::string& from, const std::string& to, const Envelope& envelope,
                    const FaultPlan& fault = {});

    std::uint64_t now() const { return clock_; }
    RunLog& log() { return log_; }
    const RunLog& log() const { return log_; }

private:
    std::map<std::string, Handler> endpoints_;
    RunLog log_;
    std::uint64_t clock_ = 0;
};

} // namespace enkvote
