"""Compile the bundled 14-node classifier and two random 12-node models
at a range of tolerances and print the size/eps curve with the exhaustive
verification report for each point.
"""
from fractions import Fraction

from ptfc.bnc import random_tan
from ptfc.compiler import CompileParams, compile, verify_compilation
from ptfc.fixtures import fig1_tan

F = Fraction


def curve(name, model):
    print(f"\n{name} (n={model.n}, whole-domain accuracy "
          f"{float(model.self_accuracy()):.4f})")
    print(f"  {'eps':>6} {'size':>7} {'width':>6} {'error mass':>11} {'kept max':>9}")
    for eps in (F(2, 5), F(1, 5), F(1, 10), F(1, 20), F(1, 40)):
        diagram = compile(model, CompileParams(eps=eps))
        report = verify_compilation(model, diagram, eps=eps)
        kept = max(diagram.meta["kept_per_layer"])
        print(f"  {float(eps):>6.3f} {diagram.size:>7} {diagram.width:>6} "
              f"{report['disagreement_mass']['value']:>11.2e} {kept:>9}")


def main():
    curve("bundled tree-augmented classifier", fig1_tan())
    chain = [None] + list(range(11))
    curve("random chain-structured model", random_tan(12, chain, seed=5))
    star = [None, 0, 0, 1, 1, 2, 2, 3, 3, 4, 4, 5]
    curve("random forest-structured model", random_tan(12, star, seed=6))


if __name__ == "__main__":
    main()
