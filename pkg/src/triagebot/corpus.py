"""Deterministic synthetic ticket corpus for training and evaluation.

Generates Portuguese support messages from templates with slot fills, a
tabular user-relationship profile per ticket, long-tailed contact-reason
counts, strictly increasing timestamps and context-gate annotations.
Ambiguous tickets share text templates across reasons and are telling apart
only through the tabular profile, which is what the fusion classifier is
supposed to exploit.

All randomness flows through numpy's PCG64 so the output is reproducible
across platforms for a given seed.
"""

from __future__ import annotations

import csv
import datetime as dt
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from .context_gate import ContextAnnotation
from .errors import DataFormatError
from .tabular import CATEGORICAL, NUMERIC, Column, FeatureSchema

BASE_TIMESTAMP = int(dt.datetime(2019, 5, 1, tzinfo=dt.timezone.utc).timestamp())
TICKET_INTERVAL = 600  # seconds between tickets; jitter stays below this


# --------------------------------------------------------------------------
# Catalog: reasons, departments, personas
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ReasonSpec:
    code: str
    department: str
    persona: str
    weight: float
    templates: tuple[str, ...]


@dataclass(frozen=True)
class AmbiguityGroup:
    """Reasons sharing one template pool; only the profile separates them."""

    name: str
    members: tuple[str, ...]
    templates: tuple[str, ...]


DEPARTMENTS = {
    "dep_visitas": "Visitas e Agendamentos",
    "dep_agentes": "Operações de Campo",
    "dep_pagamentos": "Pagamentos e Repasses",
    "dep_contratos": "Contratos e Propostas",
    "dep_manutencao": "Manutenção e Reparos",
    "dep_conta": "Cadastro e Conta",
}

PERSONAS = (
    "prospective_tenant",
    "tenant",
    "owner",
    "photographer",
    "broker",
    "inspector",
)

DEFAULT_REASONS: tuple[ReasonSpec, ...] = (
    ReasonSpec("iq_vs_agendar", "dep_visitas", "prospective_tenant", 0.135, (
        "quero agendar uma visita no imóvel {imovel}",
        "como faço para visitar o apartamento do anúncio?",
        "tem horário para visita {dia}?",
        "gostaria de conhecer o imóvel {imovel}, pode ser {dia}?",
        "vi um apartamento no site e quero marcar uma visita",
    )),
    ReasonSpec("iq_pg_boleto", "dep_pagamentos", "tenant", 0.105, (
        "o boleto do aluguel deste mês não chegou",
        "não consigo emitir a segunda via do boleto",
        "meu boleto veio com valor errado",
        "como pago o aluguel de {mes}? o boleto não abre",
        "o boleto venceu e preciso de outro com nova data",
    )),
    ReasonSpec("iq_mn_reparo", "dep_manutencao", "tenant", 0.09, (
        "a geladeira quebrou e o proprietário não responde",
        "a torneira da cozinha está pingando sem parar",
        "a fechadura da porta de entrada travou",
        "apareceu mofo na parede do quarto do imóvel {imovel}",
        "o portão da garagem parou de abrir",
    )),
    ReasonSpec("iq_vs_cancelamento", "dep_visitas", "prospective_tenant", 0.08, (
        "desisti do apartamento, pode desmarcar a visita",
        "não tenho mais interesse na visita do imóvel {imovel}",
        "encontrei outro lugar, quero desmarcar a visita de {dia}",
    )),
    ReasonSpec("iq_pr_proposta", "dep_contratos", "prospective_tenant", 0.07, (
        "quero fazer uma proposta para o imóvel {imovel}",
        "como envio uma contraproposta de aluguel?",
        "dá para negociar o valor do aluguel anunciado?",
    )),
    ReasonSpec("pp_pg_repasse", "dep_pagamentos", "owner", 0.06, (
        "o repasse do aluguel não caiu na minha conta",
        "quando recebo o repasse do imóvel {imovel}?",
        "o valor repassado veio menor que o combinado",
    )),
    ReasonSpec("cr_pg", "dep_pagamentos", "broker", 0.055, (
        "não recebi a comissão da locação do imóvel {imovel}",
        "quando sai o pagamento da minha corretagem?",
        "a comissão de {mes} veio com desconto que não entendi",
    )),
    ReasonSpec("iq_ct_rescisao", "dep_contratos", "tenant", 0.05, (
        "vou me mudar de cidade e preciso sair do apartamento",
        "quanto fica a multa para entregar o imóvel {imovel} antes do prazo?",
        "quero devolver as chaves, como agendo a saída?",
    )),
    ReasonSpec("iq_pr_reserva", "dep_contratos", "prospective_tenant", 0.045, (
        "paguei a reserva e o imóvel continua anunciado",
        "minha reserva do imóvel {imovel} não aparece no site",
        "quero saber se a reserva garante o apartamento para mim",
    )),
    ReasonSpec("ft_ag_alteracao", "dep_agentes", "photographer", 0.042, (
        "a sessão de fotos de {dia} conflitou com outra pauta",
        "posso trocar o horário do ensaio do imóvel {imovel}?",
        "preciso mover a sessão de fotos para o período da tarde",
    )),
    ReasonSpec("iq_cd_cadastro", "dep_conta", "prospective_tenant", 0.038, (
        "não consigo concluir meu cadastro no site",
        "o aplicativo diz que meu CPF já está em uso",
        "não recebo o e-mail de confirmação da conta",
    )),
    ReasonSpec("iq_vs_remarcacao", "dep_visitas", "prospective_tenant", 0.034, (
        "surgiu um imprevisto, quero outra data para a visita",
        "dá para adiar a visita do imóvel {imovel} para {dia}?",
        "cheguei atrasado e perdi a visita, posso remarcar?",
    )),
    ReasonSpec("ft_ag_cancelamento", "dep_agentes", "photographer", 0.03, (
        "meu equipamento quebrou, não consigo fotografar {dia}",
        "vou precisar cancelar o ensaio do imóvel {imovel}",
        "fiquei doente e não poderei fazer as fotos de {dia}",
    )),
    ReasonSpec("cr_ag_cancelamento", "dep_agentes", "broker", 0.027, (
        "não poderei acompanhar a visita de {dia}, outro corretor pode assumir?",
        "preciso repassar o atendimento do imóvel {imovel} para um colega",
        "tive um choque de agenda e não farei a visita marcada",
    )),
    ReasonSpec("pp_an_anuncio", "dep_conta", "owner", 0.024, (
        "quero atualizar as fotos do anúncio do imóvel {imovel}",
        "o valor do aluguel no anúncio está desatualizado",
        "como pauso o anúncio do meu apartamento?",
    )),
    ReasonSpec("pp_ct_rescisao", "dep_contratos", "owner", 0.021, (
        "quero pedir o imóvel {imovel} de volta para uso próprio",
        "como notifico o inquilino sobre o fim do contrato?",
        "não pretendo renovar o contrato atual",
    )),
    ReasonSpec("iq_mn_urgente", "dep_manutencao", "tenant", 0.018, (
        "estourou um cano e o apartamento está alagando",
        "estou sentindo cheiro de gás no imóvel {imovel}",
        "caiu a energia só no meu apartamento e não volta",
    )),
    ReasonSpec("iq_vs_atraso", "dep_visitas", "prospective_tenant", 0.015, (
        "estou na porta do imóvel {imovel} e ninguém apareceu",
        "o corretor está atrasado para a visita de hoje",
        "esperei meia hora e a visita não aconteceu",
    )),
    ReasonSpec("pp_mn_orcamento", "dep_manutencao", "owner", 0.0125, (
        "preciso aprovar o orçamento do conserto do imóvel {imovel}",
        "o valor do reparo ficou acima do esperado, tem outra cotação?",
        "autorizo a troca do aquecedor, como formalizo?",
    )),
    ReasonSpec("ft_pg_sessao", "dep_pagamentos", "photographer", 0.01, (
        "não recebi o pagamento das sessões de {mes}",
        "faltou uma sessão de fotos no meu repasse",
        "o pagamento do ensaio do imóvel {imovel} não entrou",
    )),
    ReasonSpec("in_vt_reagendar", "dep_agentes", "inspector", 0.008, (
        "a vistoria de {dia} precisa de nova data",
        "o inquilino não estará no imóvel {imovel}, remarco a vistoria?",
        "choveu muito e não consegui chegar para a vistoria",
    )),
    ReasonSpec("pp_cm_venda_imovel", "dep_conta", "owner", 0.0065, (
        "pretendo vender o imóvel {imovel} que está alugado",
        "recebi uma oferta de compra pelo apartamento, e agora?",
        "quero tirar o imóvel da locação para vender",
    )),
    ReasonSpec("pp_pg_boleto_atraso", "dep_pagamentos", "owner", 0.005, (
        "o inquilino atrasou o aluguel, quando recebo mesmo assim?",
        "como funciona a garantia quando o pagamento atrasa?",
        "segundo mês seguido de atraso do inquilino, o que fazer?",
    )),
    ReasonSpec("in_vt_laudo", "dep_agentes", "inspector", 0.004, (
        "o laudo da vistoria do imóvel {imovel} não salvou no sistema",
        "preciso corrigir uma foto anexada no laudo",
        "o aplicativo trava ao enviar o laudo de saída",
    )),
)

AMBIGUITY_GROUPS: tuple[AmbiguityGroup, ...] = (
    AmbiguityGroup("amb_cancel_visita",
                   ("iq_vs_cancelamento", "ft_ag_cancelamento", "cr_ag_cancelamento"), (
        "preciso cancelar a visita de amanhã",
        "quero cancelar a visita de {dia}",
        "não vou poder comparecer na visita do imóvel {imovel}",
        "pode cancelar minha visita marcada para {dia}?",
    )),
    AmbiguityGroup("amb_remarcar",
                   ("iq_vs_remarcacao", "ft_ag_alteracao", "in_vt_reagendar"), (
        "preciso remarcar o horário de {dia}",
        "consigo mudar o agendamento para {dia}?",
        "quero trocar o horário marcado no imóvel {imovel}",
        "dá para passar meu horário de {dia} para a semana que vem?",
    )),
    AmbiguityGroup("amb_pagamento",
                   ("pp_pg_repasse", "cr_pg", "ft_pg_sessao"), (
        "o pagamento deste mês não caiu na minha conta",
        "não recebi o valor referente a {mes}",
        "já passou o dia do pagamento e nada na conta",
        "o valor que entrou está menor do que eu esperava",
    )),
    AmbiguityGroup("amb_rescisao",
                   ("iq_ct_rescisao", "pp_ct_rescisao"), (
        "quero encerrar o contrato do imóvel {imovel}",
        "como faço para rescindir o contrato?",
        "preciso cancelar o contrato de aluguel",
    )),
    AmbiguityGroup("amb_manutencao",
                   ("iq_mn_reparo", "iq_mn_urgente"), (
        "tem um vazamento no banheiro do imóvel {imovel}",
        "o chuveiro parou de funcionar hoje",
        "problema na parte elétrica do apartamento",
    )),
    AmbiguityGroup("amb_proposta",
                   ("iq_pr_reserva", "iq_pr_proposta"), (
        "tenho uma dúvida sobre a proposta do imóvel {imovel}",
        "sobre a proposta que fiz pelo site, pode me ajudar?",
        "qual o andamento da minha proposta?",
    )),
)


@dataclass(frozen=True)
class ReasonCatalog:
    """Reason codes with their department mapping and long-tail weights."""

    reasons: tuple[ReasonSpec, ...] = DEFAULT_REASONS
    groups: tuple[AmbiguityGroup, ...] = AMBIGUITY_GROUPS

    def __post_init__(self):
        codes = {r.code for r in self.reasons}
        for group in self.groups:
            unknown = set(group.members) - codes
            if unknown:
                raise ValueError(f"group {group.name} references unknown reasons {unknown}")

    @property
    def codes(self) -> tuple[str, ...]:
        return tuple(r.code for r in self.reasons)

    @property
    def department_map(self) -> dict[str, str]:
        return {r.code: r.department for r in self.reasons}

    def spec_of(self, code: str) -> ReasonSpec:
        for r in self.reasons:
            if r.code == code:
                return r
        raise KeyError(code)


# --------------------------------------------------------------------------
# Tabular schema and persona profiles
# --------------------------------------------------------------------------

AUTO_MESSAGE_BY_DEPT = {
    "dep_visitas": "visit_reminder",
    "dep_agentes": "agenda_update",
    "dep_pagamentos": "payment_receipt",
    "dep_contratos": "contract_update",
    "dep_manutencao": "maintenance_update",
    "dep_conta": "account_update",
}

AUTO_MESSAGE_TYPES = tuple(AUTO_MESSAGE_BY_DEPT.values())


def default_schema() -> FeatureSchema:
    return FeatureSchema(columns=(
        Column("last_auto_message_type", CATEGORICAL, AUTO_MESSAGE_TYPES),
        Column("last_ticket_reason", CATEGORICAL),
        Column("agent_role", CATEGORICAL, ("none", "photographer", "broker", "inspector")),
        Column("is_registered_agent", CATEGORICAL, ("false", "true")),
        Column("active_visit_scheduled", CATEGORICAL, ("false", "true")),
        Column("has_active_contract", CATEGORICAL, ("false", "true")),
        Column("user_region", CATEGORICAL, ("sp", "rj", "mg", "df", "pr", "ba")),
        Column("hours_since_last_auto_message", NUMERIC),
        Column("days_since_last_ticket", NUMERIC),
        Column("n_rented_as_owner", NUMERIC),
        Column("n_ended_contracts_as_tenant", NUMERIC),
        Column("n_active_listings", NUMERIC),
        Column("n_visits_90d", NUMERIC),
        Column("account_age_days", NUMERIC),
    ))


# Canonical profile per persona, used both by the sampler (as the center of
# its distributions) and by the shipped UI presets.
PERSONA_PRESETS: dict[str, dict] = {
    "prospective_tenant": {
        "agent_role": "none", "is_registered_agent": "false",
        "active_visit_scheduled": "true", "has_active_contract": "false",
        "n_rented_as_owner": 0.0, "n_ended_contracts_as_tenant": 0.0,
        "n_active_listings": 0.0, "n_visits_90d": 3.0, "account_age_days": 90.0,
    },
    "tenant": {
        "agent_role": "none", "is_registered_agent": "false",
        "active_visit_scheduled": "false", "has_active_contract": "true",
        "n_rented_as_owner": 0.0, "n_ended_contracts_as_tenant": 1.0,
        "n_active_listings": 0.0, "n_visits_90d": 0.0, "account_age_days": 700.0,
    },
    "owner": {
        "agent_role": "none", "is_registered_agent": "false",
        "active_visit_scheduled": "false", "has_active_contract": "false",
        "n_rented_as_owner": 2.0, "n_ended_contracts_as_tenant": 0.0,
        "n_active_listings": 1.0, "n_visits_90d": 0.0, "account_age_days": 1200.0,
    },
    "photographer": {
        "agent_role": "photographer", "is_registered_agent": "true",
        "active_visit_scheduled": "false", "has_active_contract": "false",
        "n_rented_as_owner": 0.0, "n_ended_contracts_as_tenant": 0.0,
        "n_active_listings": 0.0, "n_visits_90d": 35.0, "account_age_days": 600.0,
    },
    "broker": {
        "agent_role": "broker", "is_registered_agent": "true",
        "active_visit_scheduled": "true", "has_active_contract": "false",
        "n_rented_as_owner": 0.0, "n_ended_contracts_as_tenant": 0.0,
        "n_active_listings": 0.0, "n_visits_90d": 18.0, "account_age_days": 800.0,
    },
    "inspector": {
        "agent_role": "inspector", "is_registered_agent": "true",
        "active_visit_scheduled": "false", "has_active_contract": "false",
        "n_rented_as_owner": 0.0, "n_ended_contracts_as_tenant": 0.0,
        "n_active_listings": 0.0, "n_visits_90d": 10.0, "account_age_days": 500.0,
    },
}


def persona_preset(persona: str) -> dict:
    """Canonical tabular record for a persona (no sampling noise)."""
    preset = dict(PERSONA_PRESETS[persona])
    preset.update({
        "last_auto_message_type": None,
        "last_ticket_reason": None,
        "user_region": "sp",
        "hours_since_last_auto_message": None,
        "days_since_last_ticket": None,
    })
    return preset


# --------------------------------------------------------------------------
# Ticket generation
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Ticket:
    id: str
    timestamp: int  # unix seconds, strictly increasing over generation order
    message: str
    record: dict
    reason: str
    department: str


@dataclass(frozen=True)
class CorpusSpec:
    seed: int = 42
    size: int = 5000
    catalog: ReasonCatalog = field(default_factory=ReasonCatalog)
    ambiguity_rate: float = 0.3
    no_context_rate: float = 0.45
    returning_rate: float = 0.08
    context_size: int | None = None  # default: 80% of size
    embedding_dim: int = 16
    embedding_noise: float = 0.8

    def __post_init__(self):
        for rate in (self.ambiguity_rate, self.no_context_rate, self.returning_rate):
            if not 0.0 <= rate <= 1.0:
                raise ValueError("rates must lie in [0, 1]")
        if self.size < len(self.catalog.reasons):
            raise ValueError(
                f"size {self.size} is smaller than the catalog ({len(self.catalog.reasons)} reasons)"
            )


DAY_FILLS = ("amanhã", "hoje", "sexta-feira", "sábado", "segunda", "dia 15", "dia 22", "terça que vem")
MONTH_FILLS = ("janeiro", "fevereiro", "março", "abril", "maio", "junho",
               "julho", "agosto", "setembro", "outubro", "novembro", "dezembro")

GREETING_PREFIXES = ("oi, ", "olá, ", "bom dia, ", "boa tarde, ", "boa noite, ")
POLITE_SUFFIXES = (", por favor", ", pode me ajudar?", ", aguardo retorno", ", obrigado")

GREETINGS = (
    "oi", "olá", "bom dia", "boa tarde", "boa noite", "oi, tudo bem?",
    "alô", "opa", "alguém pode me ajudar?", "preciso de ajuda",
    "tem alguém aí?", "oi bom dia", "me ajuda", "oi?", "olá, boa tarde",
)
LOW_VALUE = (
    "obrigado", "obrigada", "ok", "valeu", "blz", "tá bom", "certo",
    "obrigado pela atenção", "perfeito, obrigado", "show", "de nada",
    "entendi, valeu", "ótimo", "beleza então",
)
RETURNING = (
    "sobre o chamado de ontem, alguma novidade?",
    "ainda estou aguardando retorno do protocolo {num}",
    "voltando ao assunto da semana passada",
    "e aí, conseguiram resolver meu caso?",
    "continuando nosso papo de ontem",
    "alguma atualização do ticket {num}?",
)


def _fill_template(template: str, rng: np.random.Generator) -> str:
    out = template
    if "{dia}" in out:
        out = out.replace("{dia}", DAY_FILLS[int(rng.integers(len(DAY_FILLS)))])
    if "{mes}" in out:
        out = out.replace("{mes}", MONTH_FILLS[int(rng.integers(len(MONTH_FILLS)))])
    if "{imovel}" in out:
        out = out.replace("{imovel}", f"QA-{int(rng.integers(1000, 9999))}")
    if "{num}" in out:
        out = out.replace("{num}", str(int(rng.integers(10000, 99999))))
    return out


def _decorate(message: str, rng: np.random.Generator) -> str:
    if rng.random() < 0.25:
        message = GREETING_PREFIXES[int(rng.integers(len(GREETING_PREFIXES)))] + message
    if rng.random() < 0.15:
        message = message + POLITE_SUFFIXES[int(rng.integers(len(POLITE_SUFFIXES)))]
    return message


def _poisson_shift(rng: np.random.Generator, base: float, lam: float) -> float:
    return float(base + rng.poisson(lam))


def _sample_profile(persona: str, reason: ReasonSpec, catalog: ReasonCatalog,
                    rng: np.random.Generator) -> dict:
    record: dict = {}
    # weak feature-store staleness: agent role occasionally missing
    role = PERSONA_PRESETS[persona]["agent_role"]
    if role != "none" and rng.random() < 0.05:
        record["agent_role"] = "none"
        record["is_registered_agent"] = "false"
    else:
        record["agent_role"] = role
        record["is_registered_agent"] = PERSONA_PRESETS[persona]["is_registered_agent"]

    if persona == "prospective_tenant":
        record["active_visit_scheduled"] = "true" if rng.random() < 0.7 else "false"
        record["has_active_contract"] = "true" if rng.random() < 0.05 else "false"
        record["n_rented_as_owner"] = 0.0
        record["n_ended_contracts_as_tenant"] = float(rng.poisson(0.3))
        record["n_active_listings"] = 0.0
        record["n_visits_90d"] = _poisson_shift(rng, 1, 2.0)
        record["account_age_days"] = float(rng.integers(1, 400))
    elif persona == "tenant":
        record["active_visit_scheduled"] = "true" if rng.random() < 0.1 else "false"
        record["has_active_contract"] = "true" if rng.random() < 0.95 else "false"
        record["n_rented_as_owner"] = float(rng.poisson(0.05))
        record["n_ended_contracts_as_tenant"] = _poisson_shift(rng, 0, 1.0)
        record["n_active_listings"] = 0.0
        record["n_visits_90d"] = float(rng.poisson(0.4))
        record["account_age_days"] = float(rng.integers(100, 2000))
    elif persona == "owner":
        record["active_visit_scheduled"] = "false"
        record["has_active_contract"] = "true" if rng.random() < 0.1 else "false"
        record["n_rented_as_owner"] = _poisson_shift(rng, 1, 1.5)
        record["n_ended_contracts_as_tenant"] = float(rng.poisson(0.2))
        record["n_active_listings"] = float(rng.poisson(1.0))
        record["n_visits_90d"] = float(rng.poisson(0.3))
        record["account_age_days"] = float(rng.integers(200, 2500))
    elif persona == "photographer":
        record["active_visit_scheduled"] = "false"
        record["has_active_contract"] = "false"
        record["n_rented_as_owner"] = 0.0
        record["n_ended_contracts_as_tenant"] = 0.0
        record["n_active_listings"] = 0.0
        record["n_visits_90d"] = _poisson_shift(rng, 10, 25.0)
        record["account_age_days"] = float(rng.integers(100, 1500))
    elif persona == "broker":
        record["active_visit_scheduled"] = "true" if rng.random() < 0.6 else "false"
        record["has_active_contract"] = "false"
        record["n_rented_as_owner"] = 0.0
        record["n_ended_contracts_as_tenant"] = 0.0
        record["n_active_listings"] = 0.0
        record["n_visits_90d"] = _poisson_shift(rng, 5, 12.0)
        record["account_age_days"] = float(rng.integers(100, 1800))
    else:  # inspector
        record["active_visit_scheduled"] = "false"
        record["has_active_contract"] = "false"
        record["n_rented_as_owner"] = 0.0
        record["n_ended_contracts_as_tenant"] = 0.0
        record["n_active_listings"] = 0.0
        record["n_visits_90d"] = _poisson_shift(rng, 3, 8.0)
        record["account_age_days"] = float(rng.integers(100, 1500))

    record["user_region"] = ("sp", "rj", "mg", "df", "pr", "ba")[int(rng.integers(6))]

    # last automatic message: leans toward the true department (heuristic signal)
    roll = rng.random()
    if roll < 0.78:
        record["last_auto_message_type"] = AUTO_MESSAGE_BY_DEPT[reason.department]
    elif roll < 0.86:
        record["last_auto_message_type"] = None
    else:
        others = [m for d, m in AUTO_MESSAGE_BY_DEPT.items() if d != reason.department]
        record["last_auto_message_type"] = others[int(rng.integers(len(others)))]
    if record["last_auto_message_type"] is None:
        record["hours_since_last_auto_message"] = None
    else:
        record["hours_since_last_auto_message"] = round(float(rng.uniform(1, 240)), 2)

    # last ticket: repeat contacts share the reason a third of the time
    roll = rng.random()
    if roll < 0.3:
        record["last_ticket_reason"] = reason.code
    elif roll < 0.5:
        record["last_ticket_reason"] = catalog.codes[int(rng.integers(len(catalog.codes)))]
    else:
        record["last_ticket_reason"] = None
    if record["last_ticket_reason"] is None:
        record["days_since_last_ticket"] = None
    else:
        record["days_since_last_ticket"] = round(float(rng.uniform(0.5, 120)), 2)

    # sporadic feature-store gaps in the numeric columns
    for column in ("n_visits_90d", "account_age_days"):
        if rng.random() < 0.04:
            record[column] = None
    return record


def _share_probability(spec: CorpusSpec) -> float:
    weights = {r.code: r.weight for r in spec.catalog.reasons}
    total = sum(weights.values())
    eligible = sum(weights[m] for g in spec.catalog.groups for m in g.members)
    if eligible == 0:
        return 0.0
    return min(1.0, spec.ambiguity_rate * total / eligible)


def generate(spec: CorpusSpec) -> tuple[list[Ticket], list[ContextAnnotation]]:
    """Produce the ticket corpus and the context-gate annotation set."""
    ticket_rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(spec.seed, spawn_key=(0,))))
    context_rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(spec.seed, spawn_key=(1,))))

    catalog = spec.catalog
    weights = np.array([r.weight for r in catalog.reasons], dtype=np.float64)
    weights = weights / weights.sum()
    group_of = {m: g for g in catalog.groups for m in g.members}
    p_share = _share_probability(spec)

    tickets: list[Ticket] = []
    for i in range(spec.size):
        reason = catalog.reasons[int(ticket_rng.choice(len(catalog.reasons), p=weights))]
        group = group_of.get(reason.code)
        if group is not None and spec.ambiguity_rate > 0 and ticket_rng.random() < p_share:
            template = group.templates[int(ticket_rng.integers(len(group.templates)))]
        else:
            template = reason.templates[int(ticket_rng.integers(len(reason.templates)))]
        message = _decorate(_fill_template(template, ticket_rng), ticket_rng)
        record = _sample_profile(reason.persona, reason, catalog, ticket_rng)
        timestamp = BASE_TIMESTAMP + i * TICKET_INTERVAL + int(ticket_rng.integers(0, TICKET_INTERVAL - 1))
        tickets.append(Ticket(
            id=f"t-{i:06d}",
            timestamp=timestamp,
            message=message,
            record=record,
            reason=reason.code,
            department=reason.department,
        ))

    n_context = spec.context_size if spec.context_size is not None else int(0.8 * spec.size)
    annotations: list[ContextAnnotation] = []
    for _ in range(n_context):
        roll = context_rng.random()
        if roll < spec.returning_rate:
            template = RETURNING[int(context_rng.integers(len(RETURNING)))]
            annotations.append(ContextAnnotation(_fill_template(template, context_rng), "returning_client"))
        elif roll < spec.returning_rate + (1 - spec.returning_rate) * spec.no_context_rate:
            if context_rng.random() < 0.7:
                annotations.append(ContextAnnotation(
                    GREETINGS[int(context_rng.integers(len(GREETINGS)))], "no_context"))
            else:
                annotations.append(ContextAnnotation(
                    LOW_VALUE[int(context_rng.integers(len(LOW_VALUE)))], "low_value"))
        else:
            reason = catalog.reasons[int(context_rng.choice(len(catalog.reasons), p=weights))]
            template = reason.templates[int(context_rng.integers(len(reason.templates)))]
            message = _fill_template(template, context_rng)
            if context_rng.random() < 0.3:
                message = GREETING_PREFIXES[int(context_rng.integers(len(GREETING_PREFIXES)))] + message
            annotations.append(ContextAnnotation(message, "has_context"))
    return tickets, annotations


def reason_centroids(spec: CorpusSpec) -> dict[str, np.ndarray]:
    """Fixed per-reason anchor vectors for the fixture embedding file."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(spec.seed, spawn_key=(2,))))
    centroids = {}
    for reason in spec.catalog.reasons:
        v = rng.normal(size=spec.embedding_dim)
        centroids[reason.code] = 3.0 * v / np.linalg.norm(v)
    return centroids


def fixture_embeddings(tickets: Sequence[Ticket], spec: CorpusSpec) -> dict[str, np.ndarray]:
    """Planted-signal embeddings: reason centroid plus noise, one per ticket."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(spec.seed, spawn_key=(3,))))
    centroids = reason_centroids(spec)
    return {
        t.id: centroids[t.reason] + spec.embedding_noise * rng.normal(size=spec.embedding_dim)
        for t in tickets
    }


# --------------------------------------------------------------------------
# Dataset file round-trip
# --------------------------------------------------------------------------

FIXED_COLUMNS = ("id", "timestamp", "reason", "department", "message")


def write_dataset(tickets: Iterable[Ticket], path: str | Path,
                  schema: FeatureSchema | None = None) -> None:
    """Tab-delimited UTF-8 with header; timestamps as ISO-8601 UTC."""
    schema = schema or default_schema()
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
        writer.writerow(list(FIXED_COLUMNS) + [c.name for c in schema])
        for t in tickets:
            iso = dt.datetime.fromtimestamp(t.timestamp, tz=dt.timezone.utc).isoformat()
            row = [t.id, iso, t.reason, t.department, t.message]
            for column in schema:
                value = t.record.get(column.name)
                if value is None:
                    row.append("")
                elif column.kind == NUMERIC:
                    row.append(repr(float(value)))
                else:
                    row.append(str(value))
            writer.writerow(row)


def read_dataset(path: str | Path, schema: FeatureSchema | None = None) -> Iterator[Ticket]:
    """Stream tickets back; malformed rows raise with their line number."""
    schema = schema or default_schema()
    expected = list(FIXED_COLUMNS) + [c.name for c in schema]
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh, delimiter="\t", lineterminator="\n")
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError("dataset file has no header", line=1) from None
        if header != expected:
            raise DataFormatError(f"unexpected header {header!r}", line=1)
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(expected):
                raise DataFormatError(
                    f"expected {len(expected)} fields, found {len(row)}", line=lineno)
            record: dict = {}
            for column, raw in zip(schema, row[len(FIXED_COLUMNS):]):
                if raw == "":
                    record[column.name] = None
                elif column.kind == NUMERIC:
                    try:
                        record[column.name] = float(raw)
                    except ValueError:
                        raise DataFormatError(
                            f"column {column.name!r}: bad number {raw!r}", line=lineno) from None
                else:
                    record[column.name] = raw
            try:
                timestamp = int(dt.datetime.fromisoformat(row[1]).timestamp())
            except ValueError:
                raise DataFormatError(f"bad timestamp {row[1]!r}", line=lineno) from None
            yield Ticket(
                id=row[0], timestamp=timestamp, reason=row[2],
                department=row[3], message=row[4], record=record,
            )
