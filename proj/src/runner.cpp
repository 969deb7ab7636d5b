#include "enkvote/runner.hpp"

namespace enkvote {

namespace {

std::string voter_endpoint(std::size_t index) {
    return "voter:" + std::to_string(index);
}

// Carries relay messages between the role objects through the bus, so every
// hop is logged and fault-injectable. A hop whose bytes never arrive, or
// arrive unparseable, reads as lost; relay_round then fails the round.
struct BusTransport : HopTransport {
    SimBus& bus;
    Administrator& admin;
    std::optional<Envelope>& admin_slot;
    std::optional<Envelope>& counter_slot;
    std::vector<std::optional<Envelope>>& voter_slots;
    const ScenarioHooks& hooks;
    EntropySource& attacker;
    std::size_t batch;

    BusTransport(SimBus& bus, Administrator& admin, std::optional<Envelope>& admin_slot,
                 std::optional<Envelope>& counter_slot,
                 std::vector<std::optional<Envelope>>& voter_slots, const ScenarioHooks& hooks,
                 EntropySource& attacker, std::size_t batch)
        : bus(bus), admin(admin), admin_slot(admin_slot), counter_slot(counter_slot),
          voter_slots(voter_slots), hooks(hooks), attacker(attacker), batch(batch) {}

    std::optional<RelayMessage> deliver(HopKind hop, std::size_t round,
                                        const RelayMessage& message) override {
        RelayMessage msg = message;
        if (batch == 1 && hop == HopKind::open_ac && hooks.poison_round == round)
            msg.wrapped = attacker.bytes(msg.wrapped.size());

        FaultPlan fault;
        if (batch == 1 && hooks.hop_fault)
            fault = hooks.hop_fault(hop, round);

        std::size_t voter_index = admin.voter_index_for_round(round);
        std::string from, to;
        std::optional<Envelope>* slot = nullptr;
        switch (hop) {
        case HopKind::open_ac:
        case HopKind::final_ac:
            from = "admin";
            to = "counter";
            slot = &counter_slot;
            break;
        case HopKind::back_ca:
            from = "counter";
            to = "admin";
            slot = &admin_slot;
            break;
        case HopKind::deliver_av:
            from = "admin";
            to = voter_endpoint(voter_index);
            slot = &voter_slots[voter_index - 1];
            break;
        case HopKind::return_va:
            from = voter_endpoint(voter_index);
            to = "admin";
            slot = &admin_slot;
            break;
        }

        slot->reset();
        bus.deliver(from, to, Envelope{hop_msg_type(hop), msg.wire()}, fault);
        if (!*slot)
            return std::nullopt;
        try {
            return RelayMessage::from_wire((*slot)->body);
        } catch (const FormatError&) {
            return std::nullopt;
        }
    }
};

} // namespace

RunResult run_election(const Manifest& manifest, std::uint64_t seed,
                       const std::vector<std::size_t>& choices, const ScenarioHooks& hooks,
                       std::size_t round_cap, CapPolicy cap_policy) {
    ElectionConfig config = manifest.config();
    config.validate();
    if (choices.size() != config.voter_count)
        throw ConfigError("need exactly one choice per voter");
    if (round_cap < 1)
        throw ConfigError("the round cap must allow at least one batch");

    EntropySource root = EntropySource::seeded(seed, "election");
    ElectionSetup setup = setup_with_candidates(config.candidates, config.voter_count,
                                                config.group, config.password_bits, root);

    Administrator admin(config, setup.admin, root.fork("admin"));
    Counter counter(config, setup.counter, root.fork("counter"));
    std::vector<Voter> voters;
    voters.reserve(config.voter_count);
    for (std::size_t i = 1; i <= config.voter_count; ++i)
        voters.emplace_back(config, setup.voters[i - 1], root.fork("voter." + std::to_string(i)));
    // hook randomness is drawn off to the side, so scripted attacks never
    // shift what the honest parties would have drawn
    EntropySource attacker = root.fork("attacker");

    RunResult result;
    SimBus bus;
    std::optional<Envelope> admin_slot, counter_slot;
    std::vector<std::optional<Envelope>> voter_slots(config.voter_count);
    std::vector<AuthResult> auth_inbox;

    bus.register_endpoint("admin", [&](const Envelope& env) {
        if (env.type == MsgType::submit) {
            RelayMessage msg;
            try {
                msg = RelayMessage::from_wire(env.body);
            } catch (const FormatError&) {
                auth_inbox.push_back(AuthResult{AuthOutcome::rejected_tampered, 0});
                return;
            }
            auth_inbox.push_back(admin.authenticate(msg));
            return;
        }
        admin_slot = env;
    });
    bus.register_endpoint("counter", [&](const Envelope& env) { counter_slot = env; });
    for (std::size_t i = 1; i <= config.voter_count; ++i)
        bus.register_endpoint(voter_endpoint(i),
                              [&voter_slots, i](const Envelope& env) { voter_slots[i - 1] = env; });

    std::size_t attributed = 0;
    auto submit_as = [&](std::size_t index, Voter& voter, const std::string& from,
                         std::size_t choice) {
        RelayMessage sub;
        auto bo = hooks.ballot_override.find(index);
        auto vo = hooks.verif_override.find(index);
        if (bo != hooks.ballot_override.end() || vo != hooks.verif_override.end()) {
            Bytes ballot = bo != hooks.ballot_override.end()
                               ? bo->second
                               : config.candidates.codes.at(choice - 1);
            std::optional<Bytes> verif;
            if (vo != hooks.verif_override.end())
                verif = vo->second;
            sub = voter.submit_package(voter.forge_ballot(ballot, verif));
        } else {
            sub = voter.submit(choice);
        }
        FaultPlan fault;
        auto sf = hooks.submit_fault.find(index);
        if (sf != hooks.submit_fault.end())
            fault = sf->second;
        bus.deliver(from, "admin", Envelope{MsgType::submit, sub.wire()}, fault);
        while (attributed < auth_inbox.size()) {
            result.auth.push_back(
                AuthRecord{index, auth_inbox[attributed].outcome, auth_inbox[attributed].entry});
            ++attributed;
        }
    };

    for (std::size_t i = 1; i <= config.voter_count; ++i) {
        if (hooks.stall.count(i))
            continue;
        submit_as(i, voters[i - 1], voter_endpoint(i), choices[i - 1]);
    }

    if (hooks.impersonate) {
        // an insider who knows the shared channel keys but owns no roster id
        VoterCredential forged;
        forged.index = 0;
        forged.id = attacker.bytes(kIdBytes);
        forged.p_av = Password::random(config.password_bits, attacker);
        forged.p_vc = setup.counter.p_vc;
        forged.k_va = setup.admin.k_va;
        forged.k_vc = setup.counter.k_vc;
        bus.register_endpoint("intruder", [](const Envelope&) {});
        Voter ghost(config, forged, attacker.fork("ghost"));
        submit_as(0, ghost, "intruder", 1); // index 0 in the record
    }

    std::set<Bytes> handled_failures;
    Counter::PublishResult pub;
    while (true) {
        ++result.batches;
        std::vector<Bytes> authenticated = admin.close_authentication();
        if (result.batches == 1)
            result.stalled_ids = admin.stalled_ids();
        bus.deliver("admin", "counter",
                    announce_envelope("authenticated " + std::to_string(authenticated.size())));
        counter.expect_rounds(authenticated.size());
        admin.substitute();

        BusTransport transport(bus, admin, admin_slot, counter_slot, voter_slots, hooks,
                               attacker, result.batches);
        for (std::size_t j = 1; j <= admin.round_count(); ++j) {
            Voter& voter = voters[admin.voter_index_for_round(j) - 1];
            RoundReport report = relay_round(admin, counter, voter, j, transport);
            if (!report.completed)
                bus.deliver("admin", "counter",
                            announce_envelope("round_failed " +
                                              to_hex(admin.replaced_id_for_round(j))));
            result.rounds.push_back(report);
        }

        if (result.batches == 1 && hooks.tamper_row)
            counter.tamper_row(*hooks.tamper_row, hooks.tamper_mask);

        pub = counter.publish();
        Envelope export_env{MsgType::board_export, bytes_of_string(pub.export_text)};
        bus.deliver("counter", "admin", export_env);
        for (std::size_t i = 1; i <= config.voter_count; ++i)
            bus.deliver("admin", voter_endpoint(i), export_env);

        std::vector<Bytes> fresh;
        for (const auto& id : pub.failed_ids)
            if (!handled_failures.count(id))
                fresh.push_back(id);
        if (fresh.empty())
            break;
        if (result.batches >= round_cap) {
            if (cap_policy == CapPolicy::error)
                throw RoundCapExceededError("failed rounds persist at the revote cap");
            result.cap_hit = true;
            break;
        }

        std::vector<Administrator::RevoteIssue> issues = admin.open_revote(fresh);
        handled_failures.insert(fresh.begin(), fresh.end());
        for (auto& issue : issues) {
            Voter& voter = voters[issue.voter_index - 1];
            std::size_t choice = choices[issue.voter_index - 1];
            voter.adopt_revote_credential(std::move(issue.new_id), std::move(issue.new_p_av));
            submit_as(issue.voter_index, voter, voter_endpoint(issue.voter_index), choice);
        }
    }

    result.export_text = pub.export_text;
    result.exported = parse_board_export(result.export_text);
    for (std::size_t i = 1; i <= config.voter_count; ++i) {
        VoterOutcome outcome;
        outcome.index = i;
        outcome.submitted = !hooks.stall.count(i);
        if (outcome.submitted) {
            outcome.verify = voters[i - 1].verify(result.exported);
            result.receipts.push_back(Receipt{i, voters[i - 1].package()});
        }
        result.voters.push_back(outcome);
    }
    result.audit_flags = admin.audit(result.exported);
    result.log_text = bus.log().text();
    return result;
}

} // namespace enkvote
