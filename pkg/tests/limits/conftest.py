import pytest

from anisofield.convolution import AsymptoticConv, CovarianceOracle
from anisofield.kernel import AngularSpec
from anisofield.params import derive_exponents


@pytest.fixture(scope="function")
def field_oracle(make_ctx):
    def field_oracle(M=3, **kwargs):
        return CovarianceOracle(make_ctx(M=M, **kwargs), field_consistent=True)

    return field_oracle


@pytest.fixture(scope="function")
def far_oracle(make_ctx):
    def far_oracle(M=8, window=16):
        ctx = make_ctx(M=M)
        exps = derive_exponents(ctx.q1, ctx.q2)
        far_field = AsymptoticConv(
            q_tilde1=exps.q_tilde1,
            q_tilde2=exps.q_tilde2,
            angular=AngularSpec.constant(1.0),
            det_factor=1.0,
            B=tuple(tuple(float(v) for v in row) for row in ctx.matrix),
        )
        return CovarianceOracle(ctx, window=window, far_field=far_field, field_consistent=True)

    return far_oracle
