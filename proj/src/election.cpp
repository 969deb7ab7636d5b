#include "enkvote/election.hpp"

#include <algorithm>
#include <sstream>

namespace enkvote {

namespace {

bool label_ok(const std::string& label) {
    if (label.empty() || label.size() > 64)
        return false;
    for (char c : label) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                  (c >= '0' && c <= '9') || c == '_' || c == '-' || c == ' ' || c == '.';
        if (!ok)
            return false;
    }
    return true;
}

Bytes cat(ByteView a, ByteView b) {
    return concat({a, b});
}

} // namespace

CandidateSet CandidateSet::generate(std::vector<std::string> labels, unsigned code_bits,
                                    EntropySource& rng) {
    if (labels.size() < 2)
        throw ConfigError("an election needs at least two candidates");
    if (code_bits % 8 != 0 || code_bits < 8 || code_bits > 512)
        throw ConfigError("candidate code bits must be a multiple of 8 in [8, 512]");
    for (const auto& label : labels)
        if (!label_ok(label))
            throw ConfigError("candidate label rejected: " + label);
    std::set<std::string> distinct(labels.begin(), labels.end());
    if (distinct.size() != labels.size())
        throw ConfigError("candidate labels must be distinct");
    // sparseness: a random code must be valid with probability under 2^-40
    if (Bigint(labels.size()) << 40 >= Bigint(1) << code_bits)
        throw ConfigError("candidate codes too dense for the collision bound");

    CandidateSet set;
    set.code_bits = code_bits;
    set.labels = std::move(labels);
    std::set<Bytes> taken;
    for (std::size_t i = 0; i < set.labels.size(); ++i) {
        Bytes code;
        do {
            code = rng.bytes(code_bits / 8);
        } while (!taken.insert(code).second);
        set.codes.push_back(std::move(code));
    }
    return set;
}

void CandidateSet::validate() const {
    if (labels.size() < 2)
        throw ConfigError("an election needs at least two candidates");
    if (code_bits % 8 != 0 || code_bits < 8 || code_bits > 512)
        throw ConfigError("candidate code bits must be a multiple of 8 in [8, 512]");
    if (codes.size() != labels.size())
        throw ConfigError("candidate codes and labels out of step");
    for (const auto& label : labels)
        if (!label_ok(label))
            throw ConfigError("candidate label rejected: " + label);
    std::set<std::string> distinct(labels.begin(), labels.end());
    if (distinct.size() != labels.size())
        throw ConfigError("candidate labels must be distinct");
    std::set<Bytes> code_set;
    for (const auto& code : codes) {
        if (code.size() != code_octets())
            throw ConfigError("candidate code width does not match code_bits");
        if (!code_set.insert(code).second)
            throw ConfigError("candidate codes must be distinct");
    }
    if (Bigint(labels.size()) << 40 >= Bigint(1) << code_bits)
        throw ConfigError("candidate codes too dense for the collision bound");
}

std::optional<std::size_t> CandidateSet::index_of_code(ByteView code) const {
    for (std::size_t i = 0; i < codes.size(); ++i)
        if (codes[i].size() == code.size() && std::equal(code.begin(), code.end(), codes[i].begin()))
            return i;
    return std::nullopt;
}

std::string CandidateSet::announcement_text() const {
    std::ostringstream out;
    out << "candidates " << labels.size() << " code_bits " << code_bits << "\n";
    for (std::size_t i = 0; i < labels.size(); ++i)
        out << labels[i] << " " << to_hex(codes[i]) << "\n";
    return out.str();
}

std::size_t ElectionConfig::y_octets() const {
    return candidates.code_octets() + kVerifBytes + 2 * MacTag::wire_size();
}

void ElectionConfig::validate() const {
    if (voter_count < 1)
        throw ConfigError("an election needs at least one voter");
    candidates.validate();
    if (8 * y_octets() + 16 > group.bit_size())
        throw ConfigError("group too small for the signed ballot string");
    if (password_bits < 1 || password_bits > 4096)
        throw ConfigError("password bits outside [1, 4096]");
}

ElectionSetup setup_election(const std::vector<std::string>& labels, std::size_t voter_count,
                             const GroupParams& group, unsigned password_bits,
                             unsigned code_bits, EntropySource& rng) {
    EntropySource code_rng = rng.fork("candidates");
    CandidateSet candidates = CandidateSet::generate(labels, code_bits, code_rng);
    return setup_with_candidates(std::move(candidates), voter_count, group, password_bits, rng);
}

ElectionSetup setup_with_candidates(CandidateSet candidates, std::size_t voter_count,
                                    const GroupParams& group, unsigned password_bits,
                                    EntropySource& rng) {
    ElectionSetup setup;
    setup.config.group = group;
    setup.config.candidates = std::move(candidates);
    setup.config.voter_count = voter_count;
    setup.config.password_bits = password_bits;
    setup.config.validate();

    EntropySource fab = rng.fork("fabric");
    SymmetricKey k_va = SymmetricKey::random(RoleTag::va, fab);
    SymmetricKey k_ac = SymmetricKey::random(RoleTag::ac, fab);
    SymmetricKey k_vc = SymmetricKey::random(RoleTag::vc, fab);
    Password p_ac = Password::random(password_bits, fab);
    Password p_vc = Password::random(password_bits, fab);

    std::set<Bytes> ids;
    for (std::size_t i = 1; i <= voter_count; ++i) {
        VoterCredential cred;
        cred.index = i;
        cred.id = draw_fresh_id(ids, fab);
        ids.insert(cred.id);
        cred.p_av = Password::random(password_bits, fab);
        cred.p_vc = p_vc;
        cred.k_va = k_va;
        cred.k_vc = k_vc;
        setup.admin.roster.push_back(RosterEntry{cred.id, cred.p_av});
        setup.voters.push_back(std::move(cred));
    }
    setup.admin.k_va = k_va;
    setup.admin.k_ac = k_ac;
    setup.admin.p_ac = p_ac;
    setup.counter.k_ac = k_ac;
    setup.counter.k_vc = k_vc;
    setup.counter.p_ac = p_ac;
    setup.counter.p_vc = p_vc;
    setup.announcement = setup.config.candidates.announcement_text();
    return setup;
}

Bytes BallotPackage::x() const {
    Bytes out = cat(ballot, verif);
    append(out, tag_va.wire());
    return out;
}

Bytes BallotPackage::y() const {
    Bytes out = x();
    append(out, tag_vc.wire());
    return out;
}

BallotPackage BallotPackage::parse_y(ByteView y, std::size_t ballot_octets) {
    std::size_t expected = ballot_octets + kVerifBytes + 2 * MacTag::wire_size();
    if (y.size() != expected)
        throw FormatError("signed ballot string has the wrong length");
    BallotPackage pkg;
    std::size_t off = 0;
    pkg.ballot.assign(y.begin(), y.begin() + ballot_octets);
    off += ballot_octets;
    pkg.verif.assign(y.begin() + off, y.begin() + off + kVerifBytes);
    off += kVerifBytes;
    pkg.tag_va = MacTag::from_wire(y.subspan(off, MacTag::wire_size()));
    off += MacTag::wire_size();
    pkg.tag_vc = MacTag::from_wire(y.subspan(off, MacTag::wire_size()));
    return pkg;
}

Bytes RelayMessage::wire() const {
    Bytes out;
    append_u32_be(out, static_cast<std::uint32_t>(id_ciphertext.size()));
    append(out, id_ciphertext);
    append_u32_be(out, static_cast<std::uint32_t>(wrapped.size()));
    append(out, wrapped);
    return out;
}

RelayMessage RelayMessage::from_wire(ByteView data) {
    RelayMessage msg;
    std::size_t off = 0;
    std::uint32_t n1 = read_u32_be(data, off);
    off += 4;
    if (off + n1 > data.size())
        throw FormatError("relay message id field truncated");
    msg.id_ciphertext.assign(data.begin() + off, data.begin() + off + n1);
    off += n1;
    std::uint32_t n2 = read_u32_be(data, off);
    off += 4;
    if (off + n2 != data.size())
        throw FormatError("relay message length mismatch");
    msg.wrapped.assign(data.begin() + off, data.end());
    return msg;
}

std::string_view auth_outcome_name(AuthOutcome outcome) {
    switch (outcome) {
    case AuthOutcome::accepted: return "accepted";
    case AuthOutcome::rejected_duplicate: return "duplicate";
    case AuthOutcome::rejected_ineligible: return "ineligible";
    case AuthOutcome::rejected_tampered: return "tampered";
    }
    return "unknown";
}

std::string_view round_outcome_name(RoundOutcome outcome) {
    switch (outcome) {
    case RoundOutcome::recorded: return "recorded";
    case RoundOutcome::invalid_mac: return "invalid_mac";
    case RoundOutcome::invalid_duplicate_verif: return "invalid_duplicate_verif";
    case RoundOutcome::invalid_ballot: return "invalid_ballot";
    case RoundOutcome::invalid_malformed: return "invalid_malformed";
    }
    return "unknown";
}

std::string_view verify_outcome_name(VerifyOutcome outcome) {
    switch (outcome) {
    case VerifyOutcome::counted: return "counted";
    case VerifyOutcome::missing: return "missing";
    case VerifyOutcome::altered: return "altered";
    }
    return "unknown";
}

std::string_view hop_kind_name(HopKind hop) {
    switch (hop) {
    case HopKind::open_ac: return "relay_ac";
    case HopKind::back_ca: return "relay_ca";
    case HopKind::deliver_av: return "relay_av";
    case HopKind::return_va: return "relay_va";
    case HopKind::final_ac: return "relay_ac_final";
    }
    return "unknown";
}

std::vector<std::size_t> draw_permutation(std::size_t n, EntropySource& rng) {
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i)
        perm[i] = i;
    for (std::size_t i = n; i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng.below(i).convert_to<std::uint64_t>());
        std::swap(perm[i - 1], perm[j]);
    }
    return perm;
}

Bytes draw_fresh_id(const std::set<Bytes>& taken, EntropySource& rng) {
    constexpr int kMaxDraws = 1000000;
    for (int i = 0; i < kMaxDraws; ++i) {
        Bytes id = rng.bytes(kIdBytes);
        if (taken.find(id) == taken.end())
            return id;
    }
    throw EntropyError("fresh id rejection cap exceeded");
}

void Board::append(BoardRow row) {
    if (!open_)
        throw StateError("board is closed");
    for (const auto& existing : rows_)
        if (existing.verif == row.verif)
            throw StateError("duplicate verification string reached the board");
    row.entry = rows_.size() + 1;
    rows_.push_back(std::move(row));
}

void Board::close() {
    if (!open_)
        throw StateError("board already closed");
    open_ = false;
}

void Board::reopen() {
    if (open_)
        throw StateError("board already open");
    open_ = true;
}

const std::vector<BoardRow>& Board::rows() const {
    if (open_)
        throw StateError("board rows are sealed until publication");
    return rows_;
}

void Board::corrupt_row(std::size_t row_index, std::uint8_t xor_mask) {
    if (row_index >= rows_.size())
        throw DomainError("no such board row");
    rows_[row_index].ballot[0] ^= xor_mask;
}

std::vector<std::pair<std::string, std::size_t>> Board::tally(const CandidateSet& candidates) const {
    if (open_)
        throw StateError("no tally before the board closes");
    std::vector<std::pair<std::string, std::size_t>> counts;
    for (const auto& label : candidates.labels)
        counts.emplace_back(label, 0);
    for (const auto& row : rows_) {
        // Validation precedes append, so an unmatched code can only be
        // post-append corruption. It counts for nobody and the row stays
        // visible for the tag checks to flag.
        auto idx = candidates.index_of_code(row.ballot);
        if (idx)
            ++counts[*idx].second;
    }
    return counts;
}

std::string board_export_text(const Board& board, const CandidateSet& candidates,
                              const std::vector<Bytes>& failed_ids) {
    std::ostringstream out;
    for (const auto& row : board.rows()) {
        out << row.entry << "," << to_hex(row.ballot) << "," << to_hex(row.verif) << ","
            << to_hex(row.tag_va.wire()) << "\n";
    }
    for (const auto& [label, count] : board.tally(candidates))
        out << "TALLY " << label << "=" << count << "\n";
    for (const auto& id : failed_ids)
        out << "FAILED " << to_hex(id) << "\n";
    return out.str();
}

BoardExport parse_board_export(std::string_view text) {
    BoardExport exported;
    std::istringstream in{std::string(text)};
    std::string line;
    bool past_rows = false;
    while (std::getline(in, line)) {
        if (line.empty())
            throw FormatError("blank line in board export");
        if (line.rfind("TALLY ", 0) == 0) {
            past_rows = true;
            auto eq = line.rfind('=');
            if (eq == std::string::npos || eq <= 6)
                throw FormatError("malformed tally line");
            std::string label = line.substr(6, eq - 6);
            std::size_t count = 0;
            try {
                count = static_cast<std::size_t>(std::stoull(line.substr(eq + 1)));
            } catch (const std::exception&) {
                throw FormatError("malformed tally count");
            }
            exported.tally.emplace_back(label, count);
            continue;
        }
        if (line.rfind("FAILED ", 0) == 0) {
            past_rows = true;
            exported.failed_ids.push_back(from_hex(line.substr(7)));
            continue;
        }
        if (past_rows)
            throw FormatError("row line after the tally section");
        std::array<std::string, 4> fields;
        std::size_t start = 0;
        for (int f = 0; f < 3; ++f) {
            auto comma = line.find(',', start);
            if (comma == std::string::npos)
                throw FormatError("board row needs four comma-separated fields");
            fields[f] = line.substr(start, comma - start);
            start = comma + 1;
        }
        fields[3] = line.substr(start);
        BoardRow row;
        try {
            row.entry = static_cast<std::size_t>(std::stoull(fields[0]));
        } catch (const std::exception&) {
            throw FormatError("malformed board entry number");
        }
        row.ballot = from_hex(fields[1]);
        row.verif = from_hex(fields[2]);
        row.tag_va = MacTag::from_wire(from_hex(fields[3]));
        if (row.verif.size() != kVerifBytes)
            throw FormatError("board row verification string has the wrong width");
        exported.rows.push_back(std::move(row));
    }
    return exported;
}

Voter::Voter(ElectionConfig config, VoterCredential credential, EntropySource rng)
    : config_(std::move(config)),
      credential_(std::move(credential)),
      rng_(std::move(rng)),
      sym_va_(credential_.k_va),
      mac_va_(credential_.k_va),
      mac_vc_(credential_.k_vc) {
    if (credential_.id.size() != kIdBytes)
        throw ConfigError("voter id must be 16 octets");
}

BallotPackage Voter::build_ballot(std::size_t choice) {
    if (choice < 1 || choice > config_.candidates.size())
        throw ChoiceOutOfRangeError("choice outside the candidate list");
    BallotPackage pkg;
    pkg.ballot = config_.candidates.codes[choice - 1];
    pkg.verif = rng_.bytes(kVerifBytes);
    pkg.tag_va = mac_va_.tag(cat(pkg.ballot, pkg.verif), rng_);
    pkg.tag_vc = mac_vc_.tag(pkg.x(), rng_);
    return pkg;
}

BallotPackage Voter::forge_ballot(ByteView ballot, const std::optional<Bytes>& verif) {
    if (ballot.size() != config_.candidates.code_octets())
        throw DomainError("forged ballot must match the candidate code width");
    if (verif && verif->size() != kVerifBytes)
        throw DomainError("forged verification token has the wrong width");
    BallotPackage pkg;
    pkg.ballot.assign(ballot.begin(), ballot.end());
    pkg.verif = verif ? *verif : rng_.bytes(kVerifBytes);
    pkg.tag_va = mac_va_.tag(cat(pkg.ballot, pkg.verif), rng_);
    pkg.tag_vc = mac_vc_.tag(pkg.x(), rng_);
    return pkg;
}

RelayMessage Voter::submit(std::size_t choice) {
    return submit_package(build_ballot(choice));
}

RelayMessage Voter::submit_package(const BallotPackage& package) {
    package_ = package;
    Bigint element = encode_payload(package_->y(), config_.group);
    session_.emplace(EnkRole::initiator, config_.group, credential_.p_vc);
    EnkMessage first = session_->start(element, rng_);
    WrappedBytes outer = ep_wrap_bytes(credential_.p_av, first.wire(), rng_);
    RelayMessage out;
    out.id_ciphertext = sym_va_.encrypt(credential_.id, rng_);
    out.wrapped = outer.wire();
    return out;
}

RelayMessage Voter::respond(const RelayMessage& delivery) {
    if (!session_ || session_->phase() != EnkPhase::sent_first)
        throw StateError("no exchange awaiting a delivery");
    Bytes id_plain = sym_va_.decrypt(delivery.id_ciphertext);
    if (id_plain != credential_.id)
        throw StateError("delivery addressed to someone else");
    Bytes inner = ep_unwrap_bytes(credential_.p_av, WrappedBytes::from_wire(delivery.wrapped));
    EnkMessage second = EnkMessage::from_wire(inner, config_.group);
    EnkMessage third = session_->unblind(second, rng_);
    RelayMessage out;
    out.id_ciphertext = sym_va_.encrypt(credential_.id, rng_);
    out.wrapped = ep_wrap_bytes(credential_.p_av, third.wire(), rng_).wire();
    return out;
}

const BallotPackage& Voter::package() const {
    if (!package_)
        throw StateError("no ballot built yet");
    return *package_;
}

VerifyOutcome verify_package(const BallotPackage& pkg, const BoardExport& exported) {
    for (const auto& row : exported.rows) {
        if (row.verif != pkg.verif)
            continue;
        if (row.ballot == pkg.ballot && row.tag_va.wire() == pkg.tag_va.wire())
            return VerifyOutcome::counted;
        return VerifyOutcome::altered;
    }
    return VerifyOutcome::missing;
}

VerifyOutcome Voter::verify(const BoardExport& exported) const {
    return verify_package(package(), exported);
}

void Voter::adopt_revote_credential(Bytes new_id, Password new_p_av) {
    if (new_id.size() != kIdBytes)
        throw ConfigError("voter id must be 16 octets");
    credential_.id = std::move(new_id);
    credential_.p_av = std::move(new_p_av);
    session_.reset();
    package_.reset();
}

Administrator::Administrator(ElectionConfig config, AdminCredential credential, EntropySource rng)
    : config_(std::move(config)),
      k_va_(credential.k_va),
      k_ac_(credential.k_ac),
      p_ac_(credential.p_ac),
      rng_(std::move(rng)),
      sym_va_(credential.k_va),
      sym_ac_(credential.k_ac),
      mac_va_(credential.k_va) {
    if (credential.roster.size() != config_.voter_count)
        throw ConfigError("roster size does not match the electorate");
    for (std::size_t i = 0; i < credential.roster.size(); ++i) {
        const auto& entry = credential.roster[i];
        if (entry.id.size() != kIdBytes)
            throw ConfigError("roster id must be 16 octets");
        RosterState state;
        state.voter_index = i + 1;
        state.p_av = entry.p_av;
        if (!roster_.emplace(entry.id, std::move(state)).second)
            throw ConfigError("duplicate id on the roster");
    }
}

AuthResult Administrator::authenticate(const RelayMessage& submission) {
    if (phase_ != Phase::auth_open)
        throw StateError("authentication window is closed");
    Bytes id;
    try {
        id = sym_va_.decrypt(submission.id_ciphertext);
    } catch (const AuthFailError&) {
        return AuthResult{AuthOutcome::rejected_tampered, 0};
    } catch (const FormatError&) {
        return AuthResult{AuthOutcome::rejected_tampered, 0};
    }
    auto it = roster_.find(id);
    if (it == roster_.end() || it->second.consumed)
        return AuthResult{AuthOutcome::rejected_ineligible, 0};
    if (it->second.authenticated)
        return AuthResult{AuthOutcome::rejected_duplicate, 0};
    try {
        // the wrapped layer must at least parse as pass one under this
        // voter's channel password
        Bytes inner = ep_unwrap_bytes(it->second.p_av, WrappedBytes::from_wire(submission.wrapped));
        EnkMessage first = EnkMessage::from_wire(inner, config_.group);
        if (first.seq != 1)
            return AuthResult{AuthOutcome::rejected_tampered, 0};
    } catch (const FormatError&) {
        return AuthResult{AuthOutcome::rejected_tampered, 0};
    }
    it->second.authenticated = true;
    AuthRow row;
    row.entry = auth_table_.size() + 1;
    row.id = id;
    row.submission_wrapped = submission.wrapped;
    auth_table_.push_back(std::move(row));
    return AuthResult{AuthOutcome::accepted, auth_table_.back().entry};
}

std::vector<Bytes> Administrator::close_authentication() {
    if (phase_ != Phase::auth_open)
        throw StateError("authentication window is closed");
    phase_ = Phase::auth_closed;
    std::vector<Bytes> ids;
    for (std::size_t i = batch_begin_; i < auth_table_.size(); ++i)
        ids.push_back(auth_table_[i].id);
    return ids;
}

std::vector<Bytes> Administrator::stalled_ids() const {
    if (phase_ == Phase::auth_open)
        throw StateError("stalled voters are known only after the window closes");
    std::vector<std::pair<std::size_t, Bytes>> flagged;
    for (const auto& [id, state] : roster_)
        if (!state.consumed && !state.authenticated)
            flagged.emplace_back(state.voter_index, id);
    std::sort(flagged.begin(), flagged.end());
    std::vector<Bytes> out;
    for (auto& [index, id] : flagged)
        out.push_back(std::move(id));
    return out;
}

const SubstitutionTable& Administrator::substitute() {
    if (phase_ != Phase::auth_closed)
        throw StateError("substitution happens once authentication has closed");
    std::size_t batch = auth_table_.size() - batch_begin_;
    std::set<Bytes> taken;
    for (const auto& [id, state] : roster_)
        taken.insert(id);
    for (const auto& row : substitution_.rows)
        taken.insert(row.replaced_id);
    auto perm = draw_permutation(batch, rng_);
    substitution_.rows.clear();
    for (std::size_t j = 0; j < batch; ++j) {
        const AuthRow& source = auth_table_[batch_begin_ + perm[j]];
        SubstitutionRow row;
        row.round = j + 1;
        row.entry = source.entry;
        row.original_id = source.id;
        row.replaced_id = draw_fresh_id(taken, rng_);
        taken.insert(row.replaced_id);
        substitution_.rows.push_back(std::move(row));
    }
    phase_ = Phase::relaying;
    return substitution_;
}

std::size_t Administrator::round_count() const {
    return substitution_.rows.size();
}

std::size_t Administrator::voter_index_for_round(std::size_t round) const {
    const auto& row = substitution_.rows.at(round - 1);
    return roster_.at(row.original_id).voter_index;
}

const Bytes& Administrator::replaced_id_for_round(std::size_t round) const {
    return substitution_.rows.at(round - 1).replaced_id;
}

RelayMessage Administrator::round_open(std::size_t round) {
    if (phase_ != Phase::relaying)
        throw StateError("relay rounds run after substitution");
    const auto& row = substitution_.rows.at(round - 1);
    const auto& state = roster_.at(row.original_id);
    Bytes inner = ep_unwrap_bytes(state.p_av,
                                  WrappedBytes::from_wire(auth_table_.at(row.entry - 1).submission_wrapped));
    RelayMessage out;
    out.id_ciphertext = sym_ac_.encrypt(row.replaced_id, rng_);
    out.wrapped = ep_wrap_bytes(p_ac_, inner, rng_).wire();
    return out;
}

RelayMessage Administrator::round_to_voter(std::size_t round, const RelayMessage& from_counter) {
    if (phase_ != Phase::relaying)
        throw StateError("relay rounds run after substitution");
    const auto& row = substitution_.rows.at(round - 1);
    Bytes id = sym_ac_.decrypt(from_counter.id_ciphertext);
    if (id != row.replaced_id)
        throw StateError("counter reply names the wrong pseudonym");
    Bytes inner = ep_unwrap_bytes(p_ac_, WrappedBytes::from_wire(from_counter.wrapped));
    const auto& state = roster_.at(row.original_id);
    RelayMessage out;
    out.id_ciphertext = sym_va_.encrypt(row.original_id, rng_);
    out.wrapped = ep_wrap_bytes(state.p_av, inner, rng_).wire();
    return out;
}

RelayMessage Administrator::round_to_counter(std::size_t round, const RelayMessage& from_voter) {
    if (phase_ != Phase::relaying)
        throw StateError("relay rounds run after substitution");
    const auto& row = substitution_.rows.at(round - 1);
    Bytes id = sym_va_.decrypt(from_voter.id_ciphertext);
    if (id != row.original_id)
        throw StateError("voter reply names the wrong id");
    const auto& state = roster_.at(row.original_id);
    Bytes inner = ep_unwrap_bytes(state.p_av, WrappedBytes::from_wire(from_voter.wrapped));
    RelayMessage out;
    out.id_ciphertext = sym_ac_.encrypt(row.replaced_id, rng_);
    out.wrapped = ep_wrap_bytes(p_ac_, inner, rng_).wire();
    return out;
}

std::vector<std::size_t> Administrator::audit(const BoardExport& exported) const {
    std::vector<std::size_t> failing;
    for (const auto& row : exported.rows)
        if (!mac_va_.verify(cat(row.ballot, row.verif), row.tag_va))
            failing.push_back(row.entry);
    return failing;
}

std::vector<Administrator::RevoteIssue> Administrator::open_revote(
    const std::vector<Bytes>& failed_replaced_ids) {
    if (phase_ != Phase::relaying)
        throw StateError("revote opens after a relay batch completes");
    if (failed_replaced_ids.empty())
        throw StateError("no failed rounds, nothing to revote");
    std::set<Bytes> taken;
    for (const auto& [id, state] : roster_)
        taken.insert(id);
    for (const auto& row : substitution_.rows)
        taken.insert(row.replaced_id);

    std::vector<RevoteIssue> issues;
    for (const auto& failed : failed_replaced_ids) {
        auto row_it = std::find_if(substitution_.rows.begin(), substitution_.rows.end(),
                                   [&](const SubstitutionRow& r) { return r.replaced_id == failed; });
        if (row_it == substitution_.rows.end())
            throw DomainError("failed pseudonym not in the substitution table");
        auto roster_it = roster_.find(row_it->original_id);
        if (roster_it == roster_.end())
            throw DomainError("failed pseudonym maps to no roster entry");
        RosterState burned = roster_it->second;
        roster_it->second.consumed = true;

        RevoteIssue issue;
        issue.voter_index = burned.voter_index;
        issue.new_id = draw_fresh_id(taken, rng_);
        taken.insert(issue.new_id);
        issue.new_p_av = Password::random(config_.password_bits, rng_);

        RosterState fresh;
        fresh.voter_index = burned.voter_index;
        fresh.p_av = issue.new_p_av;
        roster_.emplace(issue.new_id, std::move(fresh));
        issues.push_back(std::move(issue));
    }
    batch_begin_ = auth_table_.size();
    phase_ = Phase::auth_open;
    return issues;
}

Counter::Counter(ElectionConfig config, CounterCredential credential, EntropySource rng)
    : config_(std::move(config)),
      k_ac_(credential.k_ac),
      k_vc_(credential.k_vc),
      p_ac_(credential.p_ac),
      p_vc_(credential.p_vc),
      rng_(std::move(rng)),
      sym_ac_(credential.k_ac),
      mac_vc_(credential.k_vc) {}

void Counter::expect_rounds(std::size_t count) {
    if (count < 1)
        throw DomainError("a round batch needs at least one round");
    if (!board_.open())
        board_.reopen();
    expected_ += count;
}

RelayMessage Counter::respond(const RelayMessage& opening) {
    if (expected_ == 0)
        throw StateError("no rounds announced yet");
    Bytes id = sym_ac_.decrypt(opening.id_ciphertext);
    if (!seen_ids_.insert(id).second)
        throw StateError("delivery pseudonym already used");
    Bytes inner = ep_unwrap_bytes(p_ac_, WrappedBytes::from_wire(opening.wrapped));
    EnkMessage first = EnkMessage::from_wire(inner, config_.group);
    EnkSession session(EnkRole::responder, config_.group, p_vc_);
    EnkMessage second = session.blind(first, rng_);
    RelayMessage out;
    out.id_ciphertext = sym_ac_.encrypt(id, rng_);
    out.wrapped = ep_wrap_bytes(p_ac_, second.wire(), rng_).wire();
    open_rounds_.emplace(id, OpenRound{std::move(session), true});
    return out;
}

RoundOutcome Counter::finish_round(const RelayMessage& final_pass) {
    Bytes id = sym_ac_.decrypt(final_pass.id_ciphertext);
    auto it = open_rounds_.find(id);
    if (it == open_rounds_.end())
        throw StateError("final pass for an unknown or finished pseudonym");

    BallotPackage pkg;
    try {
        Bytes inner = ep_unwrap_bytes(p_ac_, WrappedBytes::from_wire(final_pass.wrapped));
        EnkMessage third = EnkMessage::from_wire(inner, config_.group);
        Bigint element = it->second.session.finish(third);
        Bytes y = decode_payload(element, config_.group);
        pkg = BallotPackage::parse_y(y, config_.candidates.code_octets());
    } catch (const Error&) {
        mark_round_failed(id);
        return RoundOutcome::invalid_malformed;
    }
    if (!mac_vc_.verify(pkg.x(), pkg.tag_vc)) {
        mark_round_failed(id);
        return RoundOutcome::invalid_mac;
    }
    if (seen_verifs_.count(pkg.verif) != 0) {
        mark_round_failed(id);
        return RoundOutcome::invalid_duplicate_verif;
    }
    if (!config_.candidates.index_of_code(pkg.ballot)) {
        mark_round_failed(id);
        return RoundOutcome::invalid_ballot;
    }
    BoardRow row;
    row.ballot = pkg.ballot;
    row.verif = pkg.verif;
    row.tag_va = pkg.tag_va;
    board_.append(std::move(row));
    seen_verifs_.insert(pkg.verif);
    ++recorded_;
    open_rounds_.erase(it);
    return RoundOutcome::recorded;
}

void Counter::mark_round_failed(const Bytes& replaced_id) {
    for (const auto& existing : failed_ids_)
        if (existing == replaced_id)
            return; // attributed twice, count once
    failed_ids_.push_back(replaced_id);
    ++failed_count_;
    open_rounds_.erase(replaced_id);
}

Counter::PublishResult Counter::publish() {
    if (recorded_ + failed_count_ < expected_)
        throw StateError("rounds still unresolved, the board stays open");
    board_.close();
    PublishResult result;
    result.tally = board_.tally(config_.candidates);
    result.failed_ids = failed_ids_;
    result.export_text = board_export_text(board_, config_.candidates, failed_ids_);
    return result;
}

std::size_t Counter::resolved_rounds() const {
    return recorded_ + failed_count_;
}

void Counter::tamper_row(std::size_t row_index, std::uint8_t xor_mask) {
    board_.corrupt_row(row_index, xor_mask);
}

RoundReport relay_round(Administrator& admin, Counter& counter, Voter& voter,
                        std::size_t round, HopTransport& transport) {
    RoundReport report;
    report.round = round;
    auto fail = [&](const std::string& why) {
        counter.mark_round_failed(admin.replaced_id_for_round(round));
        report.completed = false;
        report.failure = why;
        return report;
    };

    RelayMessage current;
    try {
        current = admin.round_open(round);
    } catch (const Error& e) {
        return fail(std::string("opening failed: ") + e.what());
    }

    auto hop = [&](HopKind kind, const RelayMessage& msg) {
        return transport.deliver(kind, round, msg);
    };

    auto delivered = hop(HopKind::open_ac, current);
    if (!delivered)
        return fail("pass 1 lost in transit");
    try {
        current = counter.respond(*delivered);
    } catch (const Error& e) {
        return fail(std::string("counter refused pass 1: ") + e.what());
    }

    delivered = hop(HopKind::back_ca, current);
    if (!delivered)
        return fail("pass 2 lost in transit");
    try {
        current = admin.round_to_voter(round, *delivered);
    } catch (const Error& e) {
        return fail(std::string("administrator refused pass 2: ") + e.what());
    }

    delivered = hop(HopKind::deliver_av, current);
    if (!delivered)
        return fail("delivery lost in transit");
    try {
        current = voter.respond(*delivered);
    } catch (const Error& e) {
        return fail(std::string("voter refused the delivery: ") + e.what());
    }

    delivered = hop(HopKind::return_va, current);
    if (!delivered)
        return fail("return lost in transit");
    try {
        current = admin.round_to_counter(round, *delivered);
    } catch (const Error& e) {
        return fail(std::string("administrator refused the return: ") + e.what());
    }

    delivered = hop(HopKind::final_ac, current);
    if (!delivered)
        return fail("final pass lost in transit");
    try {
        report.outcome = counter.finish_round(*delivered);
    } catch (const Error& e) {
        return fail(std::string("counter refused the final pass: ") + e.what());
    }
    report.completed = true;
    if (report.outcome != RoundOutcome::recorded)
        report.failure = std::string("validation: ") + std::string(round_outcome_name(report.outcome));
    return report;
}

} // namespace enkvote
