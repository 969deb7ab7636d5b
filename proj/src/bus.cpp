#include "enkvote/bus.hpp"

#include <sstream>

namespace enkvote {

namespace {

std::string frame_digest(const Envelope& envelope) {
    auto digest = digest16("enkvote.log.v1", envelope.frame());
    return to_hex(ByteView(digest.data(), 8));
}

} // namespace

std::string RunLog::text() const {
    std::ostringstream out;
    for (const auto& e : entries_) {
        out << e.tick << " " << e.from << " -> " << e.to << " " << msg_type_name(e.type) << " "
            << e.digest;
        if (!e.note.empty())
            out << " [" << e.note << "]";
        out << "\n";
    }
    return out.str();
}

void SimBus::register_endpoint(const std::string& name, Handler handler) {
    if (!handler)
        throw ConfigError("endpoint needs a handler: " + name);
    if (!endpoints_.emplace(name, std::move(handler)).second)
        throw ConfigError("endpoint already registered: " + name);
}

bool SimBus::has_endpoint(const std::string& name) const {
    return endpoints_.count(name) != 0;
}

SimBus::Outcome SimBus::deliver(const std::string& from, const std::string& to,
                                const Envelope& envelope, const FaultPlan& fault) {
    auto it = endpoints_.find(to);
    if (it == endpoints_.end())
        throw UnknownEndpointError("no endpoint named " + to);

    Outcome outcome;
    auto note_entry = [&](const Envelope& env, const std::string& note) {
        log_.add(LogEntry{clock_, from, to, env.type, frame_digest(env), note});
    };

    ++clock_;
    switch (fault.kind) {
    case FaultPlan::Kind::none:
        note_entry(envelope, "");
        it->second(envelope);
        outcome.deliveries = 1;
        break;
    case FaultPlan::Kind::drop:
        note_entry(envelope, "dropped");
        break;
    case FaultPlan::Kind::tamper: {
        Envelope bent = envelope;
        if (bent.body.empty())
            throw DomainError("cannot tamper an empty body");
        std::size_t bit = fault.bit_position % (8 * bent.body.size());
        bent.body[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
        note_entry(bent, "tampered bit " + std::to_string(bit));
        it->second(bent);
        outcome.deliveries = 1;
        break;
    }
    case FaultPlan::Kind::delay:
        clock_ += fault.ticks;
        note_entry(envelope, "delayed " + std::to_string(fault.ticks));
        it->second(envelope);
        outcome.deliveries = 1;
        break;
    case FaultPlan::Kind::duplicate:
        note_entry(envelope, "");
        it->second(envelope);
        ++clock_;
        note_entry(envelope, "replayed");
        it->second(envelope);
        outcome.deliveries = 2;
        break;
    }
    outcome.delivered = outcome.deliveries > 0;
    outcome.tick = clock_;
    return outcome;
}

} // namespace enkvote
