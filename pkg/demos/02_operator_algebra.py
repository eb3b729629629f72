"""Product operators, the weak-coupling Hamiltonian and the query functional."""
import numpy as np

import nmrfetch as nf

system = nf.alanine()
H = nf.build_hamiltonian(system)
print("H is diagonal:", np.allclose(H, np.diag(np.diag(H))))
print("energies / 2pi (Hz):", np.round(np.diag(H).real / (2 * np.pi), 3))

# thermal state -> I_0z by saturating the register and crushing coherences
thermal = nf.thermal_state(system)
prepared = nf.prepare_I0alpha(system)
print("\nthermal diagonal: ", np.diag(thermal.matrix).real)
print("prepared diagonal:", np.diag(prepared.matrix).real, "+", prepared.identity, "* identity")
for weight, state in nf.sub_ensembles(prepared, system):
    print(f"  sub-ensemble ancilla {state.ancilla}, register {state.register} weight {weight:.3f}")

# the query functional: +1/2 for an unmarked item, -1/2 for a marked one
oracle = nf.compile_oracle(system, {"10", "11"})
for x in ["00", "01", "10", "11"]:
    rho = np.zeros((4, 4))
    rho[int(x, 2), int(x, 2)] = 1
    print(f"query_value({x}) = {nf.query_value(rho, oracle):+.2f}")
subs = nf.sub_ensembles(prepared, system)
print("uniform mixture:", round(nf.ensemble_query(subs, oracle), 12))
