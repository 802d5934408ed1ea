// Translation to linear rules: one relation per childish type, (Instantiate)
// rules deriving the type's closed-off facts, (Lift) rules stepping to
// successor types along non-full input rules.
#pragma once

#include "owqa/fact_closure.hpp"
#include "owqa/saturate.hpp"

namespace owqa {

struct LinearRuleMeta {
    enum class Kind { Instantiate, Lift } kind = Kind::Instantiate;
    int fromType = -1;
    int toType = -1;      // Lift only
    int sourceRule = -1;  // Lift only: index of the non-full rule in the input program
};

struct Linearization {
    Signature sig;                    // input signature plus one relation per type
    std::vector<TGD> rules;           // the linear program
    std::vector<LinearRuleMeta> meta; // parallel to rules
    std::vector<Atom> instance;       // saturated facts plus type facts
    std::vector<GuardedSet> types;    // the catalog, index = type id
    std::vector<int> typeRel;         // type id -> relation id
    std::map<GuardedSet, int> typeIndex;

    int type_of_relation(int rel) const;  // -1 if not a type relation
};

// Types of the saturated instance: for every principal fact and every subset
// of its positions of size <= wPrime, the canonical type of that fact with
// the instance's side facts over the selected values. Registered into `lin`
// and emitted as type facts.
void linearize_instance(const FactSet& saturated, Saturation& sat, Linearization& lin);

// Full construction: instance types, closed under (Lift); (Instantiate) and
// (Lift) rules for every catalog type and side-element endomorphism.
Linearization linearize(const Program& normalized, Saturation& sat, const FactSet& saturated);

}  // namespace owqa
