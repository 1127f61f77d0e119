"""Print the quadratic log-odds form of the bundled classifier as a
coefficient table, normalized by the x1 weight, and confirm that its sign
reproduces the classifier on every input.
"""
from ptfc.fixtures import fig1_tan
from ptfc.polynomials import bnc_to_ptf


def main():
    model = fig1_tan()
    form = bnc_to_ptf(model)
    poly = form.poly
    scale = float(poly.coefficient([0]))

    print(f"terms: {poly.size}, degree: {poly.degree}, tau: {float(form.tau):.3e}")
    print(f"\n{'term':>10} {'coefficient':>13} {'x1-normalized':>14}")
    supports = poly.term_supports()
    for support in supports:
        if len(support) != 1:
            continue
        c = float(poly.coefficient(support))
        label = f"x{min(support) + 1}"
        print(f"{label:>10} {c:>13.4f} {c / scale:>14.4f}")
    for support in supports:
        if len(support) != 2:
            continue
        c = float(poly.coefficient(support))
        u, v = sorted(support)
        label = f"x{u + 1}*x{v + 1}"
        print(f"{label:>10} {c:>13.4f} {c / scale:>14.4f}")
    c = float(poly.coefficient([]))
    print(f"{'const':>10} {c:>13.4f} {c / scale:>14.4f}")

    denom, t0, t1 = model.joint_tables()
    mismatches = sum(
        1 for mask in range(1 << model.n)
        if form.decide(tuple((mask >> i) & 1 for i in range(model.n)))
        != (1 if t1[mask] >= t0[mask] else 0)
    )
    print(f"\nsign vs classifier mismatches over all 2^{model.n} inputs: {mismatches}")


if __name__ == "__main__":
    main()
