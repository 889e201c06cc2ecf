"""Serviços do explicador de abstrações.

Modelo e PDDL (model, pddl_parser, grounding, pddl_writer), abstração e
reticulado (abstraction, lattice), validação de planos (execution), busca de
explicações (explain), mensagens (render) e o harness de benchmark (harness).
"""
