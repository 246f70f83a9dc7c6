"""Context-pattern matching for fragments and attack trees.

Fragment patterns are conjunctions of clauses over variables; `$e` is
pre-bound to the attack event's referenced element.  Matching enumerates
every satisfying binding in model document order, then applies the impact
precondition, which either keeps all bindings or rejects the fragment
with a CIA reason.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..cia import cia_satisfies
from ..errors import UnknownReference
from ..model import (
    DataflowChannel,
    DataflowComponent,
    DataflowModel,
    DeploymentElement,
    DeploymentModel,
    ElementType,
    RefKind,
    deployment_closure,
    resolve_ref,
)
from ..tree import TreeNode
from .fragments import Fragment, PatternClause, ValueSet, Var

REJECT_CONTEXT = "CONTEXT"
REJECT_CIA = "CIA"


@dataclass(frozen=True)
class BoundElement:
    """A model element bound to a pattern variable."""

    kind: RefKind
    id: str
    name: str
    version: str | None = None

    @classmethod
    def wrap(cls, obj) -> "BoundElement":
        if isinstance(obj, DataflowComponent):
            return cls(RefKind.DATAFLOW_COMPONENT, obj.id, obj.name)
        if isinstance(obj, DataflowChannel):
            return cls(RefKind.DATAFLOW_CHANNEL, obj.id, obj.name)
        if isinstance(obj, DeploymentElement):
            return cls(RefKind.DEPLOYMENT_ELEMENT, obj.id, obj.name, obj.version)
        raise TypeError(f"cannot bind {obj!r}")


Binding = dict[str, BoundElement]


@dataclass
class MatchResult:
    bindings: list[Binding]
    rejection: str | None = None  # REJECT_CONTEXT or REJECT_CIA when bindings is empty


_KIND_WORDS = {
    "COMPONENT": RefKind.DATAFLOW_COMPONENT,
    "CHANNEL": RefKind.DATAFLOW_CHANNEL,
    "DEPLOYMENT": RefKind.DEPLOYMENT_ELEMENT,
}


class _Matcher:
    def __init__(self, dataflow: DataflowModel, deployment: DeploymentModel):
        self.dataflow = dataflow
        self.deployment = deployment

    def solve(self, clauses: tuple[PatternClause, ...], binding: Binding) -> list[Binding]:
        results: list[Binding] = []
        seen: set[tuple] = set()

        def recurse(index: int, current: Binding) -> None:
            if index == len(clauses):
                key = tuple(sorted((var, el.id) for var, el in current.items()))
                if key not in seen:
                    seen.add(key)
                    results.append(dict(current))
                return
            for extended in self.eval_clause(clauses[index], current):
                recurse(index + 1, extended)

        recurse(0, dict(binding))
        return results

    # clause evaluation: yields extended bindings in deterministic model order

    def eval_clause(self, clause: PatternClause, binding: Binding):
        handler = getattr(self, f"_clause_{clause.predicate}", None)
        if handler is None:
            raise ValueError(f"unknown pattern predicate {clause.predicate!r}")
        yield from handler(clause.args, binding)

    @staticmethod
    def _value(arg, binding: Binding):
        """Bound element for a variable argument, or None if unbound."""
        if isinstance(arg, Var):
            return binding.get(arg.name)
        raise TypeError(f"expected a variable, got {arg!r}")

    @staticmethod
    def _bind(binding: Binding, arg: Var, element: BoundElement) -> Binding:
        extended = dict(binding)
        extended[arg.name] = element
        return extended

    def _clause_refKind(self, args, binding):
        var, kind_word = args
        kind = _KIND_WORDS.get(str(kind_word))
        if kind is None:
            raise ValueError(f"unknown reference kind {kind_word!r}")
        bound = self._value(var, binding)
        if bound is not None:
            if bound.kind is kind:
                yield binding
            return
        pools = {
            RefKind.DATAFLOW_COMPONENT: self.dataflow.components,
            RefKind.DATAFLOW_CHANNEL: self.dataflow.channels,
            RefKind.DEPLOYMENT_ELEMENT: self.deployment.elements,
        }
        for obj in pools[kind]:
            yield self._bind(binding, var, BoundElement.wrap(obj))

    def _iter_channel_pairs(self, role: str):
        for channel in self.dataflow.channels:
            ids = channel.writers if role == "writers" else channel.readers
            for component_id in ids:
                component = self.dataflow.components_by_id.get(component_id)
                if component is not None:
                    yield component, channel

    def _match_pair(self, args, binding, pairs):
        first_var, second_var = args
        first = self._value(first_var, binding)
        second = self._value(second_var, binding)
        for a, b in pairs:
            wrapped_a, wrapped_b = BoundElement.wrap(a), BoundElement.wrap(b)
            if first is not None and (first.kind, first.id) != (wrapped_a.kind, wrapped_a.id):
                continue
            if second is not None and (second.kind, second.id) != (wrapped_b.kind, wrapped_b.id):
                continue
            extended = binding
            if first is None:
                extended = self._bind(extended, first_var, wrapped_a)
            if second is None:
                extended = self._bind(extended, second_var, wrapped_b)
            yield extended

    def _clause_writes(self, args, binding):
        yield from self._match_pair(args, binding, self._iter_channel_pairs("writers"))

    def _clause_reads(self, args, binding):
        yield from self._match_pair(args, binding, self._iter_channel_pairs("readers"))

    def _clause_channelProperty(self, args, binding):
        var, key, values = args
        bound = self._value(var, binding)
        wanted = values.values if isinstance(values, ValueSet) else (str(values),)

        def passes(channel_id: str) -> bool:
            for dep_channel in self.deployment.channels_for_dataflow_channel.get(channel_id, ()):
                if dep_channel.properties.get(str(key)) in wanted:
                    return True
            return False

        if bound is not None:
            if bound.kind is RefKind.DATAFLOW_CHANNEL and passes(bound.id):
                yield binding
            return
        for channel in self.dataflow.channels:
            if passes(channel.id):
                yield self._bind(binding, var, BoundElement.wrap(channel))

    def _element_pairs(self, edges):
        by_id = self.deployment.elements_by_id
        for src, dst in edges:
            a, b = by_id.get(src), by_id.get(dst)
            if a is not None and b is not None:
                yield a, b

    def _clause_executesOn(self, args, binding):
        yield from self._match_pair(args, binding, self._element_pairs(self.deployment.executes_on))

    def _clause_dependsOn(self, args, binding):
        transitive = len(args) == 3 and str(args[2]) == "transitive"
        if transitive:
            pairs = []
            for element in self.deployment.elements:
                for target_id in sorted(deployment_closure(element.id, self.deployment) - {element.id}):
                    pairs.append((element, self.deployment.elements_by_id[target_id]))
        else:
            pairs = list(self._element_pairs(self.deployment.depends_on))
        yield from self._match_pair(args[:2], binding, pairs)

    def _clause_hasType(self, args, binding):
        var, type_word = args
        try:
            element_type = ElementType(str(type_word))
        except ValueError:
            raise ValueError(f"unknown element type {type_word!r}") from None
        bound = self._value(var, binding)
        if bound is not None:
            element = self.deployment.elements_by_id.get(bound.id)
            if element is not None and element.type is element_type:
                yield binding
            return
        for element in self.deployment.elements:
            if element.type is element_type:
                yield self._bind(binding, var, BoundElement.wrap(element))

    def _clause_hasProperty(self, args, binding):
        var, key, value = args
        bound = self._value(var, binding)

        def passes(element: DeploymentElement) -> bool:
            return element.properties.get(str(key)) == str(value)

        if bound is not None:
            element = self.deployment.elements_by_id.get(bound.id)
            if element is not None and passes(element):
                yield binding
            return
        for element in self.deployment.elements:
            if passes(element):
                yield self._bind(binding, var, BoundElement.wrap(element))

    def _clause_maps(self, args, binding):
        pairs = []
        for element in self.deployment.elements:
            if element.ref_component is not None:
                component = self.dataflow.components_by_id.get(element.ref_component)
                if component is not None:
                    pairs.append((element, component))
        yield from self._match_pair(args, binding, pairs)


def event_element(
    event: TreeNode, dataflow: DataflowModel, deployment: DeploymentModel
) -> BoundElement:
    if event.ref is None:
        raise UnknownReference(f"attack event {event.id} has no reference")
    return BoundElement.wrap(resolve_ref(event.ref, dataflow, deployment))


def match_fragment(
    fragment: Fragment,
    event: TreeNode,
    dataflow: DataflowModel,
    deployment: DeploymentModel,
) -> MatchResult:
    """All bindings satisfying the fragment's context and CIA preconditions."""
    subject = event_element(event, dataflow, deployment)
    matcher = _Matcher(dataflow, deployment)
    bindings = matcher.solve(fragment.pattern, {"e": subject})
    if not bindings:
        return MatchResult([], REJECT_CONTEXT)
    requirement = event.required_cia
    if requirement is not None and not cia_satisfies(requirement, fragment.provides_cia):
        return MatchResult([], REJECT_CIA)
    return MatchResult(bindings)


def at_context_matches(
    event: TreeNode,
    at,
    dataflow: DataflowModel,
    deployment: DeploymentModel,
) -> bool:
    """Does a generated attack tree concern the event's referenced element?

    Deployment-element references match when the tree's subject lies in
    their depends-on closure or their name is mentioned in the tree's
    name, step text or CPE fields.  Dataflow references go through the
    deployment model first: components via their COMPONENT_REF elements,
    channels via deployment channels linked to them.
    """
    subject = event_element(event, dataflow, deployment)
    haystack = at.text_haystack()

    if subject.kind is RefKind.DEPLOYMENT_ELEMENT:
        mapped = [deployment.elements_by_id[subject.id]]
    elif subject.kind is RefKind.DATAFLOW_COMPONENT:
        mapped = list(deployment.elements_for_component.get(subject.id, ()))
    else:  # dataflow channel: no closure, only name mentions of its deployment channels
        linked = deployment.channels_for_dataflow_channel.get(subject.id, ())
        if not linked:
            return False
        return subject.name.lower() in haystack or subject.id.lower() in haystack

    for element in mapped:
        if at.subject_element_id in deployment_closure(element.id, deployment):
            return True
        if element.name.lower() in haystack:
            return True
    return False
