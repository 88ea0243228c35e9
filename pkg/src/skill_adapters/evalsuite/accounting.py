"""Stored (Θ) and trainable-per-task (θ_Δ) parameter counts for each strategy."""

from pydantic import BaseModel

from skill_adapters.adapters.attach import adapter_blocks
from skill_adapters.adapters.modules import count_adapter_params, count_sub_adapter_params
from skill_adapters.config.config import AdapterConfig, EncoderConfig
from skill_adapters.training.strategy_names import Strategy


class AccountingRow(BaseModel):
    strategy: str
    phase: str | None = None
    theta_total: int
    theta_multiple: float
    theta_delta: int
    theta_delta_pct: float


class AccountingReport(BaseModel):
    backbone_params: int
    n_old: int
    n_new: int
    rows: list[AccountingRow]

    def row(self, strategy: Strategy, phase: str | None = None) -> AccountingRow:
        for row in self.rows:
            if row.strategy == strategy.value and row.phase == phase:
                return row
        raise KeyError(f"no accounting row for {strategy.value} phase {phase}")


def backbone_param_count(cfg: EncoderConfig) -> int:
    d, f = cfg.d_model, cfg.d_ffn
    embeddings = cfg.vocab_size * d + cfg.max_len * d
    attention = 4 * (d * d + d)
    feed_forward = d * f + f + f * d + d
    layer_norms = 2 * 2 * d
    return embeddings + cfg.n_layers * (attention + feed_forward + layer_norms)


def head_param_count(cfg: EncoderConfig) -> int:
    return cfg.d_model * cfg.d_model + cfg.d_model


def layer_norm_param_count(cfg: EncoderConfig) -> int:
    return cfg.n_layers * 4 * cfg.d_model


def insertion_points(encoder: EncoderConfig, adapter: AdapterConfig) -> int:
    return 2 * len(adapter_blocks(encoder.n_layers, adapter))


def parameter_accounting(
    encoder: EncoderConfig, adapter: AdapterConfig, n_old: int, n_new: int
) -> AccountingReport:
    n_tasks = n_old + n_new
    backbone = backbone_param_count(encoder)
    head = head_param_count(encoder)
    points = insertion_points(encoder, adapter)
    ln = layer_norm_param_count(encoder) if encoder.train_layer_norm else 0
    base_set = count_adapter_params(adapter, points)
    sub_set = count_sub_adapter_params(adapter, points)
    adapter_set = base_set + ln

    def row(strategy: Strategy, total: int, delta: int, phase: str | None = None) -> AccountingRow:
        return AccountingRow(
            strategy=strategy.value,
            phase=phase,
            theta_total=total,
            theta_multiple=total / backbone,
            theta_delta=delta,
            theta_delta_pct=100.0 * delta / backbone,
        )

    hier_total = base_set + n_tasks * (sub_set + ln)
    rows = [
        row(Strategy.FE, n_tasks * head, head),
        row(Strategy.FT, n_tasks * backbone, backbone),
        row(Strategy.MT_FT, (1 + n_new) * backbone, backbone),
        row(Strategy.ADA, n_tasks * adapter_set, adapter_set),
        row(Strategy.ADAHIT, hier_total, base_set + ln, phase="base"),
        row(Strategy.ADAHIT, hier_total, sub_set + ln, phase="sub"),
        row(Strategy.ADAHIT, hier_total, base_set + sub_set + ln, phase="union"),
        row(Strategy.MT_ALL, backbone, backbone),
    ]
    return AccountingReport(backbone_params=backbone, n_old=n_old, n_new=n_new, rows=rows)
