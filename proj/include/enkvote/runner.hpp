#pragma once

#include <enkvote/bus.hpp>

#include <functional>
#include <set>

namespace enkvote {

/// Scripted deviations from the honest run. Voter indices are 1-based; hooks
/// describe standing behavior, so a dishonest voter stays dishonest across
/// revote batches. Network and administrator hooks apply to the first batch
/// only, which lets recovery paths run clean.
struct ScenarioHooks {
    // dishonest voters
    std::map<std::size_t, Bytes> ballot_override;   // submit these ballot bytes instead
    std::map<std::size_t, Bytes> verif_override;    // reuse this verification token
    std::set<std::size_t> stall;                    // never submit
    std::map<std::size_t, FaultPlan> submit_fault;  // network fault on the submission
    bool impersonate = false;                       // extra submission under an invented id

    // dishonest administrator: swap one round's inner wrap for noise
    std::optional<std::size_t> poison_round;

    // dishonest counter: corrupt a stored row before publication
    std::optional<std::size_t> tamper_row; // 0-based row index
    std::uint8_t tamper_mask = 0x01;

    // network faults on delivery rounds
    std::function<FaultPlan(HopKind, std::size_t)> hop_fault;
};

struct AuthRecord {
    std::size_t voter_index = 0; // 0 = the impersonator
    AuthOutcome outcome = AuthOutcome::rejected_tampered;
    std::size_t entry = 0;
};

struct VoterOutcome {
    std::size_t index = 0;
    bool submitted = false;
    VerifyOutcome verify = VerifyOutcome::missing;
};

struct RunResult {
    std::string export_text;
    BoardExport exported;
    std::string log_text;
    std::vector<AuthRecord> auth;         // chronological, all batches
    std::vector<RoundReport> rounds;      // executed order, all batches
    std::vector<VoterOutcome> voters;
    std::vector<Bytes> stalled_ids;
    std::vector<std::size_t> audit_flags; // board entries failing the audit
    std::vector<Receipt> receipts;        // for every voter that submitted
    std::size_t batches = 0;              // 1 means no revote was needed
    bool cap_hit = false;                 // unresolved failures at the cap
};

enum class CapPolicy : std::uint8_t {
    error,  // RoundCapExceededError when failures persist at the cap
    report, // finish and set cap_hit instead
};

/// One complete election over the in-process bus: derive the key fabric from
/// the seed, authenticate, anonymize, deliver, validate, publish, and revote
/// failed rounds until clean or capped. Deterministic in (manifest, seed,
/// choices, hooks).
RunResult run_election(const Manifest& manifest, std::uint64_t seed,
                       const std::vector<std::size_t>& choices, const ScenarioHooks& hooks = {},
                       std::size_t round_cap = 4, CapPolicy cap_policy = CapPolicy::error);

} // namespace enkvote
