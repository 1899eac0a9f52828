// Explicit rational isometry between two congruent forms, then two integral
// isometries of small hyperbolic lattices and their classification.
#include <iostream>

#include "qforge/qforge.hpp"

using namespace qforge;

int main()
{
    const QuadLattice f1 = QuadLattice::diagonal(IntVec{5, 5, 5, 5, -1});
    const QuadLattice f2 = QuadLattice::diagonal(IntVec{1, 1, 1, 1, -1});
    const RatMatrix t = explicit_rational_isometry(f1, f2);
    std::cout << "T with T^t G2 T = G1:\n" << format_json(to_json(t)) << "\n";

    const Isometry pell = pell_automorph(QuadLattice::diagonal(IntVec{1, -2}));
    std::cout << "\nunit of Z[sqrt 2] on <1,-2>:\n"
              << format_json(json{{"matrix", to_json(pell.matrix)}, {"class", to_json(classify(pell))}}) << "\n";

    const QuadLattice u = QuadLattice(IntMatrix{{0, 1, 0}, {1, 0, 0}, {0, 0, -2}});
    const Isometry e = eichler_transvection(u, IntVec{1, 0, 0}, IntVec{0, 0, 1});
    std::cout << "\ntransvection on U+<-2>:\n"
              << format_json(json{{"matrix", to_json(e.matrix)}, {"class", to_json(classify(e))}}) << "\n";
}
