#pragma once

#include <optional>
#include <vector>

#include "fedcaus/graph.hpp"

namespace fedcaus {

/// Closes g under Meek rules R1-R4. Directed marks are never reversed and
/// the skeleton is untouched. Throws InconsistentPdag if the input or the
/// result has a directed cycle.
Pdag complete_pdag(const Pdag& g);

/// Dor-Tarsi extension: a DAG with the skeleton of g that keeps every
/// directed mark and introduces no v-structure. nullopt if none exists.
std::optional<Dag> consistent_extension(const Pdag& g);

/// CPDAG of the Markov equivalence class of g.
Cpdag cpdag_of(const Dag& g);

/// True iff g is the CPDAG of some DAG.
bool is_cpdag(const Pdag& g);

/// v-structures of the mutilated graph that g itself does not have.
std::vector<VStructure> induced_v_structures(const Dag& g, const ClientTargets& targets);

/// CPDAG of g with every client-level v-structure oriented, Meek-closed.
Pdag phi_cpdag(const Dag& g, const InterventionFamily& family);

/// Graphical test for equivalence under unknown intervention families:
/// equal skeletons, equal v-structures, and equal sets of v-structures
/// induced by some member of the family.
bool phi_markov_equivalent(const Dag& g1, const InterventionFamily& fam1, const Dag& g2,
                           const InterventionFamily& fam2);

}  // namespace fedcaus
