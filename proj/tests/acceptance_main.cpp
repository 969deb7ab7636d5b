// Acceptance gate: one line per criterion, nonzero exit when any fails.
// Every check is wall-clock bounded; exceeding the budget fails the line.

#include <enkvote/runner.hpp>
#include <enkvote/security.hpp>
#include <enkvote/sockets.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <functional>
#include <future>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace enkvote;

namespace {

struct Check {
    std::vector<std::string> failures;

    void expect(bool ok, const std::string& what) {
        if (!ok)
            failures.push_back(what);
    }
};

Manifest election_manifest(std::size_t voters, std::uint64_t seed, const GroupParams& group,
                           unsigned password_bits, RunMode mode) {
    EntropySource root = EntropySource::seeded(seed, "election");
    EntropySource code_rng = root.fork("candidates");
    Manifest manifest;
    manifest.mode = mode;
    manifest.group = group;
    manifest.candidates = CandidateSet::generate({"Alpha", "Beta"}, 64, code_rng);
    manifest.voter_count = voters;
    manifest.password_bits = password_bits;
    return manifest;
}

std::size_t tally_count(const BoardExport& exported, const std::string& label) {
    for (const auto& [name, count] : exported.tally)
        if (name == label)
            return count;
    return static_cast<std::size_t>(-1);
}

bool same_row_content(const BoardRow& a, const BoardRow& b) {
    return a.ballot == b.ballot && a.verif == b.verif && a.tag_va.tag == b.tag_va.tag &&
           a.tag_va.nonce == b.tag_va.nonce;
}

// ---- criterion 1: three-pass algebra ---------------------------------------

void check_three_pass_trip(Check& check, const GroupParams& group, EntropySource& rng,
                           const char* scale) {
    const Bigint message = rng.in_range(Bigint(2), group.q() - 2);
    const BlindingExponent a = sample_blinding_exponent(group, rng);
    const BlindingExponent b = sample_blinding_exponent(group, rng);

    const Bigint pass1 = mod_exp(message, a.e, group);
    const Bigint other_order = mod_exp(mod_exp(message, b.e, group), a.e, group);
    const Bigint pass2 = mod_exp(pass1, b.e, group);
    check.expect(pass2 == other_order, std::string(scale) + ": exponent order changed the result");

    check.expect(mod_exp(pass1, a.e_inv, group) == message,
                 std::string(scale) + ": blind then unblind is not the identity");

    const Bigint pass3 = mod_exp(pass2, a.e_inv, group);
    check.expect(mod_exp(pass3, b.e_inv, group) == message,
                 std::string(scale) + ": three-pass chain did not recover the message");
}

Check criterion_algebra() {
    Check check;
    EntropySource rng = EntropySource::seeded(101, "acceptance.algebra");

    for (int i = 0; i < 1000; ++i) {
        const GroupParams group = GroupParams::generate(64, GroupProfile::plain_prime, rng);
        check_three_pass_trip(check, group, rng, "64-bit");
        if (!check.failures.empty())
            break;
    }
    const GroupParams big = GroupParams::standard(2048);
    for (int i = 0; i < 10; ++i)
        check_three_pass_trip(check, big, rng, "2048-bit");

    const Bigint q = 23;
    check.expect(mod_pow(5, 3, q) == 10, "trace: 5^3 mod 23 != 10");
    check.expect(mod_pow(10, 7, q) == 14, "trace: 10^7 mod 23 != 14");
    const Bigint a_inv = mod_inverse(3, 22);
    const Bigint b_inv = mod_inverse(7, 22);
    check.expect(a_inv == 15, "trace: 3^-1 mod 22 != 15");
    check.expect(b_inv == 19, "trace: 7^-1 mod 22 != 19");
    check.expect(mod_pow(14, a_inv, q) == 17, "trace: 14^15 mod 23 != 17");
    check.expect(mod_pow(17, b_inv, q) == 5, "trace: 17^19 mod 23 != 5");
    return check;
}

// ---- criterion 2: cost-model golden values ---------------------------------

Check criterion_cost_model() {
    Check check;
    const CostModelReport generic = generic_gate_bound();
    for (const ReportRow& row : generic.rows)
        check.expect(row.match, "generic profile mismatch: " + row.parameter + " expected " +
                                    row.expected + " computed " + row.computed);
    check.expect(generic.min_password_bits == 68, "generic recommendation is not 68 bits");

    const CostModelReport ion = ion_trap_bound();
    for (const ReportRow& row : ion.rows)
        check.expect(row.match, "ion-trap profile mismatch: " + row.parameter + " expected " +
                                    row.expected + " computed " + row.computed);
    check.expect(ion.min_password_bits == 88, "ion-trap recommendation is not 88 bits");

    check.expect(min_password_bits(Rational(Bigint(1) << 32), Rational(1, Bigint(10000000000)),
                                   Rational(1)) == 66,
                 "generic first-principles bound is not 66 bits");
    check.expect(min_password_bits(Rational(Bigint(1) << 32), Rational(57, 2000),
                                   Rational(Bigint(1) << 49)) == 87,
                 "ion-trap first-principles bound is not 87 bits");
    return check;
}

// ---- criterion 3: end-to-end election --------------------------------------

Check criterion_election() {
    Check check;
    const std::size_t n = 25;
    const std::uint64_t seed = 13121;
    const GroupParams group = GroupParams::standard(2048);
    const Manifest manifest = election_manifest(n, seed, group, kDefaultPasswordBits,
                                                RunMode::simulated);
    std::vector<std::size_t> choices;
    for (std::size_t i = 0; i < n; ++i)
        choices.push_back(i < 13 ? 1 : 2);

    const RunResult run = run_election(manifest, seed, choices);
    check.expect(run.exported.rows.size() == n, "board row count is not 25");
    check.expect(tally_count(run.exported, "Alpha") == 13, "Alpha tally is not 13");
    check.expect(tally_count(run.exported, "Beta") == 12, "Beta tally is not 12");
    check.expect(std::all_of(run.voters.begin(), run.voters.end(),
                             [](const VoterOutcome& v) {
                                 return v.verify == VerifyOutcome::counted;
                             }),
                 "not every voter verifies as counted");
    check.expect(run.audit_flags.empty(), "the administrator audit is not empty");
    check.expect(run.exported.failed_ids.empty(), "failed ids on a clean run");

    const RunResult again = run_election(manifest, seed, choices);
    check.expect(again.export_text == run.export_text, "same-seed export is not byte-identical");
    check.expect(again.log_text == run.log_text, "same-seed log is not byte-identical");

    // socket mode, same seed and fabric
    Manifest wired = manifest;
    wired.mode = RunMode::socket;
    EntropySource root = EntropySource::seeded(seed, "election");
    const ElectionSetup setup = setup_with_candidates(manifest.candidates, n, group,
                                                      manifest.password_bits, root);

    std::promise<std::uint16_t> counter_port_promise;
    std::promise<std::uint16_t> admin_port_promise;
    auto counter_port = counter_port_promise.get_future();
    auto admin_port = admin_port_promise.get_future();
    std::atomic<std::size_t> authenticated{0};

    std::string counter_export;
    std::string admin_export;
    std::thread counter_thread([&] {
        CounterServeOptions options;
        options.manifest = wired;
        options.credential = setup.counter;
        options.seed = seed;
        options.listen = {"127.0.0.1", 0};
        options.timeout_ms = 25000;
        options.on_listening = [&](std::uint16_t port) { counter_port_promise.set_value(port); };
        try {
            counter_export = serve_counter(options);
        } catch (...) {
        }
    });
    std::thread admin_thread([&] {
        AdminServeOptions options;
        options.manifest = wired;
        options.credential = setup.admin;
        options.seed = seed;
        options.listen = {"127.0.0.1", 0};
        options.counter = {"127.0.0.1", counter_port.get()};
        options.timeout_ms = 25000;
        options.on_listening = [&](std::uint16_t port) { admin_port_promise.set_value(port); };
        options.on_authenticated = [&](std::size_t count) { authenticated = count; };
        try {
            admin_export = serve_admin(options);
        } catch (...) {
        }
    });

    const std::uint16_t port = admin_port.get();
    std::vector<VoterRunResult> results(n);
    std::vector<std::thread> voter_threads;
    for (std::size_t i = 0; i < n; ++i) {
        voter_threads.emplace_back([&, i, port] {
            VoterRunOptions options;
            options.manifest = wired;
            options.credential = setup.voters[i];
            options.choice = choices[i];
            options.seed = seed;
            options.admin = {"127.0.0.1", port};
            options.timeout_ms = 25000;
            try {
                results[i] = run_voter(options);
            } catch (...) {
            }
        });
        while (authenticated < i + 1)
            std::this_thread::sleep_for(std::chrono::milliseconds(1));
    }
    for (auto& thread : voter_threads)
        thread.join();
    admin_thread.join();
    counter_thread.join();

    check.expect(admin_export == run.export_text,
                 "socket administrator export differs from the simulated export");
    check.expect(counter_export == run.export_text,
                 "socket counter export differs from the simulated export");
    for (std::size_t i = 0; i < n; ++i) {
        check.expect(results[i].export_text == run.export_text,
                     "socket voter export differs from the simulated export");
        check.expect(results[i].verify == VerifyOutcome::counted,
                     "socket voter does not verify as counted");
    }
    return check;
}

// ---- criterion 4: attack suite ---------------------------------------------

Check criterion_attacks() {
    Check check;
    const AttackSuiteReport report = attack_suite(40117, 1);
    check.expect(report.outcomes.size() == 7, "the suite did not run all seven scenarios");
    for (const AttackOutcome& outcome : report.outcomes)
        check.expect(outcome.detected, std::string(attack_scenario_name(outcome.scenario)) +
                                           " undetected: " + outcome.response);
    return check;
}

// ---- criterion 5: privacy properties ---------------------------------------

Check criterion_privacy() {
    Check check;

    const AdminSweepReport sweep = admin_key_sweep(50123);
    check.expect(sweep.hops == 10, "admin sweep recorded an unexpected hop count");
    check.expect(sweep.frame_hits == 0, "the administrator key ring decoded a framed payload");
    check.expect(!sweep.ballot_recovered, "the administrator key ring recovered a ballot");

    EntropySource rng = EntropySource::seeded(50124, "acceptance.privacy");
    const GroupParams group = GroupParams::generate(20, GroupProfile::safe_prime, rng);
    const PasswordAttackStats stats = password_attack_demo(group, 8, 50, rng);
    check.expect(stats.always_recovered, "a trial failed to recover the true password first");
    check.expect(stats.false_accepts == 0, "the consistency check accepted a false password");
    check.expect(stats.mean_guesses >= 64.0 && stats.mean_guesses <= 160.0,
                 "mean guesses " + std::to_string(stats.mean_guesses) +
                     " outside [64, 160] over 50 trials");

    const Password truth = password_from_value(164, 8);
    const EnkTranscript small = record_enk_exchange(group, Bytes{}, truth, rng);
    const EkeUniformityReport uniform_small = eke_uniformity_check(small, 8);
    check.expect(uniform_small.rejected == 0,
                 "a wrong password was rejectable on format at 20-bit q");

    const EnkTranscript wide =
        record_enk_exchange(GroupParams::standard(768), Bytes{0x42}, truth, rng);
    const EkeUniformityReport uniform_wide = eke_uniformity_check(wide, 8);
    check.expect(uniform_wide.rejected == 0,
                 "a wrong password was rejectable on format at 768-bit q");
    return check;
}

// ---- criterion 6: MAC and cipher properties --------------------------------

Check criterion_mac_cipher() {
    Check check;
    EntropySource rng = EntropySource::seeded(60991, "acceptance.mac");

    MacContext mac(SymmetricKey::random(RoleTag::va, rng));
    const Bytes message = rng.bytes(64);
    const MacTag honest = mac.tag(message, rng);
    check.expect(mac.verify(message, honest), "an honest tag failed to verify");

    std::size_t forgeries = 0;
    for (int i = 0; i < 50000; ++i) {
        MacTag forged;
        rng.fill(forged.tag.data(), forged.tag.size());
        rng.fill(forged.nonce.data(), forged.nonce.size());
        if (mac.verify(message, forged))
            ++forgeries;
    }
    for (int i = 0; i < 50000; ++i) {
        Bytes other = rng.bytes(64);
        if (other == message)
            continue;
        if (mac.verify(other, honest))
            ++forgeries;
    }
    check.expect(forgeries == 0,
                 std::to_string(forgeries) + " forgeries passed in 100000 attempts");

    SymCipher cipher(SymmetricKey::random(RoleTag::ac, rng));
    const Bytes plaintext = rng.bytes(32);
    const Bytes wire = cipher.encrypt(plaintext, rng);
    check.expect(cipher.decrypt(wire) == plaintext, "the untouched wire did not decrypt");
    std::size_t undetected = 0;
    for (std::size_t bit = 0; bit < wire.size() * 8; ++bit) {
        Bytes flipped = wire;
        flipped[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
        try {
            cipher.decrypt(flipped);
            ++undetected;
        } catch (const Error&) {
        }
    }
    check.expect(undetected == 0,
                 std::to_string(undetected) + " single-bit ciphertext flips went undetected");

    for (int round = 0; round < 3; ++round) {
        MacContext fresh(SymmetricKey::random(RoleTag::vc, rng));
        std::array<std::uint8_t, kMacNonceBytes> nonce{};
        rng.fill(nonce.data(), nonce.size());
        fresh.tag(message, nonce);
        bool raised = false;
        try {
            fresh.tag(message, nonce);
        } catch (const NonceReuseError&) {
            raised = true;
        }
        check.expect(raised, "MAC nonce reuse did not raise");

        SymCipher channel(SymmetricKey::random(RoleTag::va, rng));
        EntropySource first = EntropySource::seeded(7000 + round, "acceptance.nonce");
        EntropySource replay = first;
        channel.encrypt(plaintext, first);
        raised = false;
        try {
            channel.encrypt(plaintext, replay);
        } catch (const NonceReuseError&) {
            raised = true;
        }
        check.expect(raised, "cipher nonce reuse did not raise");
    }
    return check;
}

// ---- criterion 7: unreusability and eligibility ----------------------------

Check criterion_reuse_eligibility() {
    Check check;
    const std::uint64_t seed = 70200;
    const GroupParams group = GroupParams::standard(768);
    const Manifest manifest = election_manifest(3, seed, group, 64, RunMode::simulated);
    const std::vector<std::size_t> choices = {1, 2, 2};

    const RunResult clean = run_election(manifest, seed, choices);
    check.expect(clean.exported.rows.size() == 3, "clean baseline did not publish three rows");

    // duplicate ID: the same submission delivered twice
    {
        ScenarioHooks hooks;
        hooks.submit_fault[1] = FaultPlan::duplicate();
        const RunResult run = run_election(manifest, seed, choices, hooks);
        const std::size_t duplicates =
            std::count_if(run.auth.begin(), run.auth.end(), [](const AuthRecord& record) {
                return record.outcome == AuthOutcome::rejected_duplicate;
            });
        check.expect(duplicates == 1, "the replayed id was not rejected as a duplicate");
        check.expect(run.export_text == clean.export_text,
                     "a duplicate id submission mutated the board");
    }

    // off-roster ID
    {
        ScenarioHooks hooks;
        hooks.impersonate = true;
        const RunResult run = run_election(manifest, seed, choices, hooks);
        const std::size_t turned_away =
            std::count_if(run.auth.begin(), run.auth.end(), [](const AuthRecord& record) {
                return record.voter_index == 0 &&
                       record.outcome == AuthOutcome::rejected_ineligible;
            });
        check.expect(turned_away == 1, "the off-roster id was not rejected as ineligible");
        check.expect(run.export_text == clean.export_text,
                     "an off-roster submission mutated the board");
    }

    // duplicate S_i: two authenticated ballots carrying the same token
    {
        const Bytes token(16, 0x5a);
        ScenarioHooks hooks;
        hooks.verif_override[1] = token;
        hooks.verif_override[3] = token;
        const RunResult run =
            run_election(manifest, seed, choices, hooks, 1, CapPolicy::report);
        const std::size_t refused =
            std::count_if(run.rounds.begin(), run.rounds.end(), [](const RoundReport& round) {
                return round.completed &&
                       round.outcome == RoundOutcome::invalid_duplicate_verif;
            });
        check.expect(refused == 1, "the duplicated token round was not refused");
        check.expect(run.exported.rows.size() == 2,
                     "the board does not hold exactly the two surviving rows");

        const auto holder = std::find_if(run.exported.rows.begin(), run.exported.rows.end(),
                                         [&](const BoardRow& row) { return row.verif == token; });
        check.expect(holder != run.exported.rows.end(),
                     "the first appearance of the token is missing from the board");
        const std::size_t token_rows =
            std::count_if(run.exported.rows.begin(), run.exported.rows.end(),
                          [&](const BoardRow& row) { return row.verif == token; });
        check.expect(token_rows == 1, "the duplicated token appears more than once");

        if (holder != run.exported.rows.end()) {
            // identify the winner by ballot code, then rerun with only the
            // winner holding the token: its row must be untouched
            const std::vector<Bytes>& codes = manifest.candidates.codes;
            const std::size_t winner = holder->ballot == codes[0] ? 1 : 3;
            ScenarioHooks base_hooks;
            base_hooks.verif_override[winner] = token;
            const RunResult base = run_election(manifest, seed, choices, base_hooks);
            const auto base_holder =
                std::find_if(base.exported.rows.begin(), base.exported.rows.end(),
                             [&](const BoardRow& row) { return row.verif == token; });
            check.expect(base_holder != base.exported.rows.end() &&
                             same_row_content(*holder, *base_holder),
                         "the surviving token row was mutated by the duplicate attempt");
        }
    }
    return check;
}

// ---- driver -----------------------------------------------------------------

struct Criterion {
    int number;
    std::string title;
    double budget_s;
    std::function<Check()> run;
};

} // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "three-pass algebra (1000 trips at 64-bit, 10 at 2048-bit, q=23 trace)", 10.0,
         criterion_algebra},
        {2, "cost-model golden values, exact rational match", 1.0, criterion_cost_model},
        {3, "end-to-end election, 25 voters 13/12 at 2048-bit, sockets byte-identical", 30.0,
         criterion_election},
        {4, "attack suite, all seven scenarios, exhaustive hop flips", 60.0, criterion_attacks},
        {5, "privacy: admin key sweep, 8-bit password fall, EKE uniformity", 120.0,
         criterion_privacy},
        {6, "MAC forgeries, ciphertext flips, nonce reuse", 60.0, criterion_mac_cipher},
        {7, "duplicate id, duplicate token, off-roster id leave the board intact", 10.0,
         criterion_reuse_eligibility},
    };

    int failed = 0;
    for (const Criterion& criterion : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Check check;
        try {
            check = criterion.run();
        } catch (const std::exception& e) {
            check.failures.push_back(std::string("unhandled exception: ") + e.what());
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (elapsed > criterion.budget_s)
            check.failures.push_back("over budget: " + std::to_string(elapsed) + " s");

        const bool pass = check.failures.empty();
        if (!pass)
            ++failed;
        std::printf("%s  %d  %s  (%.1fs of %.0fs)\n", pass ? "PASS" : "FAIL", criterion.number,
                    criterion.title.c_str(), elapsed, criterion.budget_s);
        for (const std::string& reason : check.failures)
            std::printf("      - %s\n", reason.c_str());
        std::fflush(stdout);
    }
    return failed;
}
