#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "enkvote/crypto.hpp"
#include "enkvote/enk.hpp"

namespace enkvote {

constexpr std::size_t kIdBytes = 16;
constexpr std::size_t kVerifBytes = 16;
constexpr unsigned kDefaultCodeBits = 64;

/// Public candidate list: one fixed-width random code per label. Codes are
/// sparse in their space so a random string is a valid ballot with
/// probability below 2^-40.
struct CandidateSet {
    unsigned code_bits = kDefaultCodeBits;
    std::vector<std::string> labels;
    std::vector<Bytes> codes;

    static CandidateSet generate(std::vector<std::string> labels, unsigned code_bits,
                                 EntropySource& rng); // ConfigError
    std::size_t size() const { return labels.size(); }
    std::size_t code_octets() const { return code_bits / 8; }
    std::optional<std::size_t> index_of_code(ByteView code) const;
    std::string announcement_text() const;

    /// Full well-formedness check, for sets that arrive from a manifest
    /// rather than from generate.
    void validate() const; // ConfigError
};

struct VoterCredential {
    std::size_t index = 0; // 1-based
    Bytes id;              // kIdBytes octets
    Password p_av;
    Password p_vc;
    SymmetricKey k_va;
    SymmetricKey k_vc;
};

struct RosterEntry {
    Bytes id;
    Password p_av;
};

struct AdminCredential {
    SymmetricKey k_va;
    SymmetricKey k_ac;
    Password p_ac;
    std::vector<RosterEntry> roster; // position = voter index - 1
};

struct CounterCredential {
    SymmetricKey k_ac;
    SymmetricKey k_vc;
    Password p_ac;
    Password p_vc;
};

struct ElectionConfig {
    GroupParams group;
    CandidateSet candidates;
    std::size_t voter_count = 0;
    unsigned password_bits = kDefaultPasswordBits;

    /// Octet length of the full signed ballot string Y.
    std::size_t y_octets() const;
    void validate() const; // ConfigError
};

struct ElectionSetup {
    ElectionConfig config;
    std::vector<VoterCredential> voters;
    AdminCredential admin;
    CounterCredential counter;
    std::string announcement;
};

/// Phase one: fix the candidate set and mint the whole key fabric. Candidate
/// codes come from the rng's "candidates" fork and keys from its "fabric"
/// fork, so a run that already has the candidate set (from a manifest) can
/// reproduce the identical key fabric with setup_with_candidates.
ElectionSetup setup_election(const std::vector<std::string>& labels, std::size_t voter_count,
                             const GroupParams& group, unsigned password_bits,
                             unsigned code_bits, EntropySource& rng);

ElectionSetup setup_with_candidates(CandidateSet candidates, std::size_t voter_count,
                                    const GroupParams& group, unsigned password_bits,
                                    EntropySource& rng);

/// The voter-built ballot string and its two tags:
///   X = ballot || verif || tag_va,  Y = X || tag_vc.
struct BallotPackage {
    Bytes ballot;
    Bytes verif;
    MacTag tag_va; // over ballot || verif, checked by the administrator
    MacTag tag_vc; // over X, checked by the counter

    Bytes x() const;
    Bytes y() const;
    static BallotPackage parse_y(ByteView y, std::size_t ballot_octets); // FormatError
};

/// Every channel message of phases two and three has this shape: an
/// authenticated-encrypted delivery id plus the password-wrapped exchange
/// message for the current hop.
struct RelayMessage {
    Bytes id_ciphertext;
    Bytes wrapped;

    Bytes wire() const;
    static RelayMessage from_wire(ByteView data); // FormatError
};

enum class AuthOutcome : std::uint8_t {
    accepted,
    rejected_duplicate,
    rejected_ineligible,
    rejected_tampered,
};
std::string_view auth_outcome_name(AuthOutcome outcome);

struct AuthResult {
    AuthOutcome outcome = AuthOutcome::rejected_tampered;
    std::size_t entry = 0; // valid when accepted
};

struct AuthRow {
    std::size_t entry = 0;
    Bytes id;
    Bytes submission_wrapped; // voter's wrapped pass-1, stored until relay
};

struct SubstitutionRow {
    std::size_t round = 0; // delivery order j, 1-based within its batch
    std::size_t entry = 0;
    Bytes original_id;
    Bytes replaced_id;
};

struct SubstitutionTable {
    std::vector<SubstitutionRow> rows;
};

/// Uniform permutation of {0, .., n-1} by Fisher-Yates.
std::vector<std::size_t> draw_permutation(std::size_t n, EntropySource& rng);

/// Fresh id distinct from everything in `taken`.
Bytes draw_fresh_id(const std::set<Bytes>& taken, EntropySource& rng);

struct BoardRow {
    std::size_t entry = 0; // assigned by the board, 1-based arrival order
    Bytes ballot;
    Bytes verif;
    MacTag tag_va;
};

/// Append-only while open; reads and tallies only once closed, so no partial
/// count can leak while rounds are still arriving.
class Board {
public:
    void append(BoardRow row); // StateError when closed; entry is overwritten
    void close();              // StateError when already closed
    void reopen();             // StateError when open
    bool open() const { return open_; }
    std::size_t row_count() const { return rows_.size(); }

    const std::vector<BoardRow>& rows() const;                                    // StateError while open
    std::vector<std::pair<std::string, std::size_t>> tally(const CandidateSet&) const; // StateError while open

    /// Dishonest-keeper modeling for attack scenarios: flip ballot bits in a
    /// stored row, bypassing every honesty check.
    void corrupt_row(std::size_t row_index, std::uint8_t xor_mask);

private:
    std::vector<BoardRow> rows_;
    bool open_ = true;
};

std::string board_export_text(const Board& board, const CandidateSet& candidates,
                              const std::vector<Bytes>& failed_ids);

struct BoardExport {
    std::vector<BoardRow> rows;
    std::vector<std::pair<std::string, std::size_t>> tally;
    std::vector<Bytes> failed_ids;
};

BoardExport parse_board_export(std::string_view text); // FormatError

enum class VerifyOutcome : std::uint8_t { counted, missing, altered };
std::string_view verify_outcome_name(VerifyOutcome outcome);

/// Check a retained ballot package against the published board. Matches by
/// the verification token; counted needs the ballot and administrator tag to
/// agree too.
VerifyOutcome verify_package(const BallotPackage& package, const BoardExport& exported);

/// One eligible voter. Builds the double-tagged ballot, runs the initiator
/// side of the exchange, and checks itself on the published board.
class Voter {
public:
    Voter(ElectionConfig config, VoterCredential credential, EntropySource rng);

    std::size_t index() const { return credential_.index; }
    const Bytes& id() const { return credential_.id; }

    BallotPackage build_ballot(std::size_t choice); // 1-based; ChoiceOutOfRangeError

    /// Build a package over arbitrary ballot bytes and an optional caller-fixed
    /// verification token. Tags are minted honestly, so this models a voter who
    /// holds the keys but submits content outside the protocol: a ballot that
    /// is no candidate code, or a token copied from someone else.
    BallotPackage forge_ballot(ByteView ballot, const std::optional<Bytes>& verif = std::nullopt);

    /// Build, remember and wrap the ballot; returns the submission message.
    RelayMessage submit(std::size_t choice);

    /// Submit a caller-built package. Exists so dishonest behavior is
    /// expressible in tests and attack scenarios.
    RelayMessage submit_package(const BallotPackage& package);

    /// Handle the administrator's pass-2 delivery, produce pass 3.
    RelayMessage respond(const RelayMessage& delivery);

    const BallotPackage& package() const; // StateError before submit
    VerifyOutcome verify(const BoardExport& exported) const;

    /// Adopt the replacement id and channel password issued for a revote.
    void adopt_revote_credential(Bytes new_id, Password new_p_av);

private:
    ElectionConfig config_;
    VoterCredential credential_;
    EntropySource rng_;
    SymCipher sym_va_;
    MacContext mac_va_;
    MacContext mac_vc_;
    std::optional<EnkSession> session_;
    std::optional<BallotPackage> package_;
};

/// The administrator: authenticates submissions, anonymizes delivery order
/// and identity, relays blind, audits the board. Never holds K_vc or P_vc,
/// so it can check tag_va but never forge a counter-acceptable ballot.
class Administrator {
public:
    Administrator(ElectionConfig config, AdminCredential credential, EntropySource rng);

    AuthResult authenticate(const RelayMessage& submission);
    const std::vector<AuthRow>& auth_table() const { return auth_table_; }

    /// Ends the submission window for this batch. Returns the authenticated
    /// ids; stalled_ids() lists eligible ids that never submitted.
    std::vector<Bytes> close_authentication();
    std::vector<Bytes> stalled_ids() const; // StateError while auth is open

    /// Phase three bookkeeping: fresh pseudonyms in a fresh random order.
    const SubstitutionTable& substitute(); // StateError before close
    std::size_t round_count() const;
    std::size_t voter_index_for_round(std::size_t round) const;
    const Bytes& replaced_id_for_round(std::size_t round) const;

    RelayMessage round_open(std::size_t round);
    RelayMessage round_to_voter(std::size_t round, const RelayMessage& from_counter);
    RelayMessage round_to_counter(std::size_t round, const RelayMessage& from_voter);

    /// Entries whose administrator tag fails on the published board.
    std::vector<std::size_t> audit(const BoardExport& exported) const;

    struct RevoteIssue {
        std::size_t voter_index = 0;
        Bytes new_id;
        Password new_p_av;
    };

    /// Map failed pseudonyms back, retire the burned ids, issue fresh ones,
    /// and reopen authentication for exactly those voters.
    std::vector<RevoteIssue> open_revote(const std::vector<Bytes>& failed_replaced_ids);

private:
    enum class Phase : std::uint8_t { auth_open, auth_closed, relaying };

    struct RosterState {
        std::size_t voter_index = 0;
        Password p_av;
        bool consumed = false; // retired by a revote reissue
        bool authenticated = false;
    };

    ElectionConfig config_;
    SymmetricKey k_va_;
    SymmetricKey k_ac_;
    Password p_ac_;
    EntropySource rng_;
    SymCipher sym_va_;
    SymCipher sym_ac_;
    MacContext mac_va_;
    std::map<Bytes, RosterState> roster_;
    std::vector<AuthRow> auth_table_;   // cumulative across batches
    std::size_t batch_begin_ = 0;       // first auth_table_ index of the current batch
    SubstitutionTable substitution_;    // current batch only
    Phase phase_ = Phase::auth_open;
};

enum class RoundOutcome : std::uint8_t {
    recorded,
    invalid_mac,
    invalid_duplicate_verif,
    invalid_ballot,
    invalid_malformed,
};
std::string_view round_outcome_name(RoundOutcome outcome);

/// The counter: blind responder of the exchange, validator of ballots,
/// keeper of the bulletin board. Sees only pseudonyms, never voter ids.
class Counter {
public:
    Counter(ElectionConfig config, CounterCredential credential, EntropySource rng);

    /// Arm the next batch of rounds (the administrator's authenticated-count
    /// announcement). Reopens the board after a previous publication.
    void expect_rounds(std::size_t count);

    /// Pass 1 in, pass 2 out. StateError on a duplicate delivery id,
    /// AuthFailError when the id ciphertext fails its tag.
    RelayMessage respond(const RelayMessage& opening);

    /// Pass 3 in; validate and either record or fail the round.
    RoundOutcome finish_round(const RelayMessage& final_pass);

    /// Transport-level failure attributed by the administrator's notice.
    void mark_round_failed(const Bytes& replaced_id);

    /// StateError while any expected round is unresolved. Closes the board.
    struct PublishResult {
        std::string export_text;
        std::vector<std::pair<std::string, std::size_t>> tally;
        std::vector<Bytes> failed_ids;
    };
    PublishResult publish();

    const Board& board() const { return board_; }
    std::size_t expected_rounds() const { return expected_; }
    std::size_t resolved_rounds() const;

    /// Dishonest-counter hook for attack scenarios: corrupt a stored row.
    void tamper_row(std::size_t row_index, std::uint8_t xor_mask);

private:
    struct OpenRound {
        EnkSession session;
        bool responded = false;
    };

    ElectionConfig config_;
    SymmetricKey k_ac_;
    SymmetricKey k_vc_;
    Password p_ac_;
    Password p_vc_;
    EntropySource rng_;
    SymCipher sym_ac_;
    MacContext mac_vc_;
    std::map<Bytes, OpenRound> open_rounds_; // by replaced id
    std::set<Bytes> seen_ids_;
    std::set<Bytes> seen_verifs_;
    std::vector<Bytes> failed_ids_; // cumulative, chronological
    std::size_t expected_ = 0;
    std::size_t recorded_ = 0;
    std::size_t failed_count_ = 0;
    Board board_;
};

enum class HopKind : std::uint8_t { open_ac, back_ca, deliver_av, return_va, final_ac };
std::string_view hop_kind_name(HopKind hop);

/// Transport seam between the relay choreography and whatever carries the
/// bytes (in-process bus, sockets). Returning nullopt means the hop was lost.
struct HopTransport {
    virtual ~HopTransport() = default;
    virtual std::optional<RelayMessage> deliver(HopKind hop, std::size_t round,
                                                const RelayMessage& message) = 0;
};

/// completed means all five passes arrived and the counter reached a
/// validation verdict; outcome is meaningful only then. A round that dies in
/// transit leaves completed false and the reason in failure.
struct RoundReport {
    std::size_t round = 0;
    bool completed = false;
    RoundOutcome outcome = RoundOutcome::invalid_malformed;
    std::string failure;
};

/// Drive the five messages of one anonymous delivery round. Any lost or
/// poisoned hop fails the round and informs the counter through the
/// administrator's attribution.
RoundReport relay_round(Administrator& admin, Counter& counter, Voter& voter,
                        std::size_t round, HopTransport& transport);

} // namespace enkvote
