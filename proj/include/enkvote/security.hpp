#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>
#include <string_view>
#include <vector>

#include "enkvote/election.hpp"
#include "enkvote/enk.hpp"

namespace enkvote {

/// Exact arithmetic for the cost calculator. Every bound below is computed
/// over rationals and compared exactly; floats appear only in footnotes.
using Rational = boost::multiprecision::cpp_rational;

/// Parse a decimal or scientific literal ("2.85e-4", "101", "-0.5") into the
/// exact rational it denotes. FormatError on anything else.
Rational rational_from_decimal(std::string_view text);

/// Smallest non-negative k with 2^k >= value. DomainError for value <= 0.
unsigned ceil_log2(const Rational& value);

/// Physical attack budget: the time one serialized guess costs and how much
/// guessing the adversary can buy.
struct PhysicalParams {
    Rational gate_time_s;       // seconds per serialized gate
    Rational serial_gates;      // gates one guess must run in sequence
    Rational attack_duration_s; // total wall-clock budget
    Rational computer_count;    // machines guessing in parallel

    void validate() const; // DomainError on any non-positive field
};

/// Conservative bound from the time-energy uncertainty limit: 1e-14 s gates,
/// 1e4 serialized gates per guess, a 2^32 s campaign on one machine.
PhysicalParams generic_profile();

/// Bound from demonstrated ion-trap hardware: 2.85e-4 s gates, 1e2 serialized
/// gates, 2^32 s across the 2^49 machine cap (one machine per square meter of
/// planet surface stays below it).
PhysicalParams ion_trap_profile();

struct ReportRow {
    std::string parameter;
    std::string expected;
    std::string computed;
    bool match = false;
};

struct CostModelReport {
    PhysicalParams params;
    Rational per_guess_time_s;    // serial_gates * gate_time_s, exact
    Bigint guesses_within_budget; // floor(duration * computers / per-guess)
    unsigned guess_bits = 0;      // ceil(log2) of the pre-floor quotient
    unsigned min_password_bits = 0; // recommendation: guess_bits + margin
    unsigned margin_bits = 0;
    std::vector<ReportRow> rows; // profile expectations, for the CLI table
    std::string note;

    std::string table() const;
    bool all_match() const;
};

/// Evaluate the generic (uncertainty-limit) bound. The expectation rows pin
/// the published numbers: 1e-10 s per guess, a 66-bit guess budget, and the
/// 68-bit password recommendation. DomainError via validate().
CostModelReport generic_gate_bound(const PhysicalParams& params = generic_profile());

/// Evaluate the ion-trap bound: 2.85e-2 s per guess, under 2^38 guesses per
/// machine, machine cap 2^49, an 87-bit guess budget, 88-bit passwords.
CostModelReport ion_trap_bound(const PhysicalParams& params = ion_trap_profile());

/// ceil(log2(duration * computers / per_guess)), exact. A password of this
/// many bits has more keys than the adversary has guesses. DomainError on
/// non-positive inputs.
unsigned min_password_bits(const Rational& attack_duration_s, const Rational& per_guess_time_s,
                           const Rational& computer_count);

/// A three-pass exchange as a wire observer records it, plus the ground truth
/// the demos assert against. The attack code reads only group and the wires.
struct EnkTranscript {
    GroupParams group;
    Bytes pass1;
    Bytes pass2;
    Bytes pass3;
    Password password; // truth
    Bytes payload;     // truth
};

/// Run one honest exchange and keep the wires.
EnkTranscript record_enk_exchange(const GroupParams& group, ByteView payload,
                                  const Password& password, EntropySource& rng);

/// Candidate number value as a password of space_bits bits, big-endian.
/// DomainError when the value does not fit or space_bits is 0 or above 64.
Password password_from_value(std::uint64_t value, unsigned space_bits);

struct GuessAttackResult {
    bool recovered = false;
    std::uint64_t guesses = 0;           // candidates consumed up to the first accept
    std::uint64_t accepted = 0;          // accepts across the whole sweep
    std::uint64_t format_rejections = 0; // candidate unwraps the wire refused; stays 0
    Bytes password_octets;               // first accepted candidate
    Bytes payload;                       // payload that candidate reconstructs
};

/// The guessing attack an eavesdropper runs against a recorded exchange, over
/// the exhaustive candidate space [0, 2^space_bits): unwrap the three passes
/// under the candidate, brute-force the responder exponent in the prime-order
/// subgroup, reconstruct the payload element and accept when it frames. The
/// sweep always finishes (soundness needs every candidate); guesses reports
/// where the first accept landed. OracleTooLargeError for q >= 2^32;
/// DomainError for a non-safe-prime group or space_bits outside [1, 16].
GuessAttackResult attack_password_guess(const EnkTranscript& transcript, unsigned space_bits);

struct PasswordAttackStats {
    unsigned space_bits = 0;
    unsigned trials = 0;
    double mean_guesses = 0.0;
    std::uint64_t false_accepts = 0;     // accepted candidates besides the truth
    std::uint64_t format_rejections = 0; // summed over trials; stays 0
    bool always_recovered = true;        // first accept was the true password every time
};

/// Fresh password and payload per trial, attack_password_guess on each.
PasswordAttackStats password_attack_demo(const GroupParams& group, unsigned space_bits,
                                         unsigned trials, EntropySource& rng);

struct EkeUniformityReport {
    std::uint64_t candidates = 0;
    std::uint64_t rejected = 0; // candidates any pass refused to unwrap
};

/// The encoding property the wrap construction promises: every candidate
/// password unwraps every recorded pass to a well-formed element, so no
/// candidate can be eliminated without the exponent work. rejected stays 0.
EkeUniformityReport eke_uniformity_check(const EnkTranscript& transcript, unsigned space_bits);

struct AdminSweepReport {
    std::size_t hops = 0;          // relay messages recorded
    std::size_t attempts = 0;      // decode attempts across the key ring
    std::size_t frame_hits = 0;    // attempts that produced any framed payload
    bool ballot_recovered = false; // a decode equal to some true Y
};

/// The honest-but-curious administrator: relay a small election faithfully,
/// record every hop, then grind the full held key ring (channel passwords,
/// roster passwords, both symmetric keys) against the recording. The inner
/// layer rides under the voter-counter password the administrator never
/// holds, so nothing frames.
AdminSweepReport admin_key_sweep(std::uint64_t seed,
                                 const GroupParams& group = GroupParams::standard(768));

enum class AttackScenario : std::uint8_t {
    invalid_ballot,     // voter submits bytes outside the candidate set
    stalling_voter,     // voter takes credentials, never submits
    admin_substitution, // administrator swaps a relayed ciphertext
    counter_tamper,     // counter edits a stored board row
    hop_tamper,         // outsider flips single bits on relay messages
    replay_submission,  // outsider replays a recorded submission
    impersonation,      // outsider with channel keys but an invented id
};

std::string_view attack_scenario_name(AttackScenario scenario);
AttackScenario attack_scenario_from_name(std::string_view name); // DomainError

struct AttackOutcome {
    AttackScenario scenario{};
    std::string property; // the election property the scenario probes
    bool detected = false;
    std::string response; // what the machinery reported
};

struct AttackSuiteReport {
    std::vector<AttackOutcome> outcomes;

    bool all_detected() const;
    std::string table() const;
};

/// Run one scripted attack against a small fixed election and judge the
/// response. hop_tamper_stride thins the exhaustive bit sweep of the
/// hop_tamper scenario (1 = every bit of every hop message; the full sweep is
/// a few thousand relay rounds).
AttackOutcome run_attack(AttackScenario scenario, std::uint64_t seed,
                         std::size_t hop_tamper_stride = 1);

/// All seven scenarios, one per claimed property.
AttackSuiteReport attack_suite(std::uint64_t seed, std::size_t hop_tamper_stride = 1);

} // namespace enkvote
