#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>
#include <sstream>

#include "dune/engine.hpp"
#include "dune/kb.hpp"
#include "dune/session.hpp"
#include "support/test_support.hpp"

namespace dune {
namespace {

using testing::oracle_confidences;
using testing::random_kb;
using testing::random_sequence;
using testing::recompute_confidence;

std::string describe(const KnowledgeBase& kb, const std::vector<FeatureId>& seq) {
    std::string out = serialize_kb(kb) + "sequence:";
    for (const auto& f : seq) out += " " + f.str();
    return out;
}

TEST(Properties, IncrementalMatchesFromScratch) {
    std::mt19937 rng(20240601);
    for (int iter = 0; iter < 1000; ++iter) {
        auto kb = random_kb(rng);
        auto seq = random_sequence(rng, 10, 6);
        auto expected = oracle_confidences(kb, seq);
        Engine engine(kb);
        for (std::size_t j = 0; j < seq.size(); ++j) {
            auto report = engine.apply_step(seq[j]);
            for (std::size_t d = 0; d < kb.demons.size(); ++d) {
                ASSERT_EQ(report.rows[d].conf, expected[j][d]) << "step " << j + 1 << " demon " << d << "\n" << describe(kb, seq);
            }
        }
    }
}

TEST(Properties, RawReactionIsDifferenceOfRecomputations) {
    std::mt19937 rng(77);
    for (int iter = 0; iter < 500; ++iter) {
        auto kb = random_kb(rng, {.immortal = true});
        auto seq = random_sequence(rng, 10, 6);
        Engine engine(kb);
        std::vector<FeatureId> prefix;
        for (const auto& f : seq) {
            for (std::size_t d = 0; d < kb.demons.size(); ++d) {
                auto r = raw_reaction(kb.demons[d], engine.states()[d], f);
                auto with = prefix;
                with.push_back(f);
                int expected = recompute_confidence(kb.demons[d], with) - recompute_confidence(kb.demons[d], prefix);
                ASSERT_EQ(r.raw + r.or_bonus, expected) << describe(kb, seq);
                for (int delta : r.group_deltas) ASSERT_GE(delta, 0);
            }
            engine.apply_step(f);
            prefix.push_back(f);
        }
    }
}

TEST(Properties, PotentialCompletesToReachableConfidence) {
    std::mt19937 rng(99);
    for (int iter = 0; iter < 500; ++iter) {
        auto kb = random_kb(rng, {.immortal = true});
        auto seq = random_sequence(rng, 10, 6);
        Engine engine(kb);
        for (const auto& f : seq) engine.apply_step(f);
        for (std::size_t d = 0; d < kb.demons.size(); ++d) {
            const auto& state = engine.states()[d];
            // Completion: every remaining feature arrives, but negative leaves
            // of features not yet received are ignored.
            auto optimistic = kb.demons[d];
            for (auto& [f, w] : optimistic.leaves) {
                if (!state.received(f)) w = std::max(0, w);
            }
            auto everything = state.rcvd_features;
            for (const auto& f : optimistic.features()) everything.push_back(f);
            EXPECT_EQ(state.confidence + potential_remaining(kb.demons[d], state), recompute_confidence(optimistic, everything))
                << describe(kb, seq);
        }
    }
}

TEST(Properties, FinalConfidenceIsPermutationInvariant) {
    std::mt19937 rng(4242);
    for (int iter = 0; iter < 200; ++iter) {
        auto kb = random_kb(rng, {.immortal = true});
        auto seq = random_sequence(rng, 10, 6);
        Engine a(kb);
        for (const auto& f : seq) a.apply_step(f);
        std::shuffle(seq.begin(), seq.end(), rng);
        Engine b(kb);
        for (const auto& f : seq) b.apply_step(f);
        for (std::size_t d = 0; d < kb.demons.size(); ++d) {
            EXPECT_EQ(a.states()[d].confidence, b.states()[d].confidence) << describe(kb, seq);
            EXPECT_EQ(a.states()[d].group_states, b.states()[d].group_states);
        }
    }
}

TEST(Properties, ResubmittingReceivedFeatureIsANoOp) {
    std::mt19937 rng(515);
    int checked = 0;
    for (int iter = 0; iter < 400 && checked < 200; ++iter) {
        auto kb = random_kb(rng);
        auto seq = random_sequence(rng, 10, 6);
        if (seq.empty()) continue;
        Engine engine(kb);
        for (const auto& f : seq) engine.apply_step(f);
        auto before = engine.states();
        auto again = seq[std::uniform_int_distribution<std::size_t>(0, seq.size() - 1)(rng)];
        auto report = engine.apply_step(again);
        for (std::size_t d = 0; d < before.size(); ++d) {
            const auto& after = engine.states()[d];
            EXPECT_EQ(after.confidence, before[d].confidence);
            EXPECT_EQ(after.old_confidence, before[d].old_confidence);
            EXPECT_EQ(after.group_states, before[d].group_states);
            EXPECT_EQ(after.rcvd_features, before[d].rcvd_features);
            EXPECT_EQ(after.status, before[d].status);
            EXPECT_EQ(report.rows[d].react, 0);
            EXPECT_EQ(report.rows[d].or_bns, 0);
        }
        ++checked;
    }
    EXPECT_EQ(checked, 200);
}

TEST(Properties, StepInvariantsHold) {
    std::mt19937 rng(8080);
    for (int iter = 0; iter < 500; ++iter) {
        auto kb = random_kb(rng);
        auto seq = random_sequence(rng, 10, 6);
        Engine engine(kb);
        std::map<std::string, int> accepts;
        for (const auto& f : seq) {
            auto before = engine.states();
            auto report = engine.apply_step(f);
            for (std::size_t d = 0; d < kb.demons.size(); ++d) {
                const auto& def = kb.demons[d];
                const auto& s = engine.states()[d];
                const auto& row = report.rows[d];
                // Schedule caching.
                for (std::size_t g = 0; g < def.groups.size(); ++g) {
                    std::size_t k = 0;
                    for (const auto& m : def.groups[g].members) k += s.received(m);
                    EXPECT_EQ(s.group_states[g].satisfied_count, k);
                    EXPECT_EQ(s.group_states[g].prev_or_bonus, def.groups[g].schedule.at(k));
                }
                if (before[d].status == Status::dead) {
                    // Monotone death.
                    EXPECT_EQ(s, before[d]);
                    EXPECT_EQ(row.conf, -1);
                    continue;
                }
                if (s.confidence != before[d].confidence) {
                    // Step identity and OLD semantics.
                    EXPECT_EQ(row.old, before[d].confidence);
                    EXPECT_EQ(s.confidence, row.old + row.react + row.or_bns);
                } else {
                    EXPECT_EQ(s.old_confidence, before[d].old_confidence);
                }
                EXPECT_EQ(s.fnum, engine.step());
            }
            for (const auto& e : report.events) {
                if (e.kind == EventKind::accept) ++accepts[e.subject];
            }
        }
        for (const auto& [name, count] : accepts) EXPECT_EQ(count, 1) << name;
    }
}

TEST(Properties, DemonOrderWithinStepDoesNotMatter) {
    BehaviorRegistry registry;
    // Inhibited by the strongest competitor, read from the pre-step environment.
    registry.add("inhibited", [](const Reaction& r, const Environment& env) {
        int strongest = 0;
        for (const auto& [name, conf] : env.confidences) strongest = std::max(strongest, conf);
        int delta = r.raw + r.or_bonus;
        return delta > 0 ? delta - delta * strongest / 200 : delta;
    });
    std::mt19937 rng(31337);
    for (int iter = 0; iter < 300; ++iter) {
        auto kb = random_kb(rng);
        for (auto& d : kb.demons) d.behavior = "inhibited";
        auto shuffled = kb;
        std::shuffle(shuffled.demons.begin(), shuffled.demons.end(), rng);
        auto seq = random_sequence(rng, 10, 6);
        Engine a(kb, registry);
        Engine b(shuffled, registry);
        for (const auto& f : seq) {
            auto ra = a.apply_step(f);
            auto rb = b.apply_step(f);
            auto by_name = [](std::vector<TraceRow> rows) {
                std::sort(rows.begin(), rows.end(), [](const TraceRow& x, const TraceRow& y) { return x.demon < y.demon; });
                return rows;
            };
            ASSERT_EQ(by_name(ra.rows), by_name(rb.rows)) << describe(kb, seq);
        }
    }
}

TEST(Properties, LogRoundTripOnRandomSessions) {
    std::mt19937 rng(2718);
    for (int iter = 0; iter < 200; ++iter) {
        auto kb = random_kb(rng);
        Session session(kb);
        for (const auto& f : random_sequence(rng, 10, 6)) session.submit(f.str());
        std::stringstream buffer;
        persist_log(session, buffer);
        auto loaded = load_log(buffer, kb);
        ASSERT_EQ(loaded.engine().states(), session.engine().states());
        ASSERT_EQ(loaded.log(), session.log());
    }
}

TEST(Properties, ParseSerializeRoundTrip) {
    std::mt19937 rng(161803);
    for (int iter = 0; iter < 300; ++iter) {
        auto kb = testing::random_syntax_kb(rng);
        auto text = serialize_kb(kb);
        auto first = parse_kb({text});
        ASSERT_TRUE(first.ok()) << text << "\n" << (first.diagnostics.empty() ? "" : first.diagnostics[0].message);
        EXPECT_EQ(*first.kb, kb) << text;
        auto second = parse_kb({serialize_kb(*first.kb)});
        ASSERT_TRUE(second.ok());
        EXPECT_EQ(*second.kb, *first.kb);
        EXPECT_EQ(serialize_kb(*second.kb), text);
    }
}

}  // namespace
}  // namespace dune
