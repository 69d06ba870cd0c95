"""Ontology terms used by the encoders, bound against the default prefixes."""
from __future__ import annotations

from odang.namespaces import ODANG, STANDARD_NAMESPACES
from odang.terms import Iri

_ns = STANDARD_NAMESPACES


def _t(ns: str, local: str) -> Iri:
    return Iri(ns + local)


RDF_TYPE = _t(_ns["rdf"], "type")
RDFS_LABEL = _t(_ns["rdfs"], "label")
RDFS_SUBCLASS_OF = _t(_ns["rdfs"], "subClassOf")

FRBR_EXPRESSION = _t(_ns["frbr"], "Expression")
DUL_IS_PART_OF = _t(_ns["dul"], "isPartOf")
DUL_DESCRIPTION = _t(_ns["dul"], "Description")
DUL_IS_ROLE_OF = _t(_ns["dul"], "isRoleOf")
PROV_WAS_ATTRIBUTED_TO = _t(_ns["prov"], "wasAttributedTo")
PROV_PERSON = _t(_ns["prov"], "Person")
FABIO_WEB_CONTENT = _t(_ns["fabio"], "WebContent")

# O-Dang! vocabulary (default ":" prefix)
SITUATION = _t(ODANG, "Situation")
PERSON = _t(ODANG, "Person")
CORPUS = _t(ODANG, "Corpus")
IS_SETTING_FOR = _t(ODANG, "isSettingFor")
HAS_ROLE = _t(ODANG, "hasRole")
HAS_TEXT = _t(ODANG, "hasText")
HAS_TARGET = _t(ODANG, "hasTarget")
HAS_VALUE = _t(ODANG, "hasValue")
IS_DESCRIBED = _t(ODANG, "isDescribed")
HAS_ID = _t(ODANG, "hasID")
HANDLE = _t(ODANG, "handle")
GENDER = _t(ODANG, "gender")
BIRTH_YEAR = _t(ODANG, "birthYear")
COUNTRY_OF_CITIZENSHIP = _t(ODANG, "countryOfCitizenship")
CITIZENSHIP = _t(ODANG, "citizenship")
PLACE_OF_BIRTH = _t(ODANG, "placeOfBirth")
OCCUPATION = _t(ODANG, "occupation")
POLITICAL_PARTY = _t(ODANG, "politicalParty")
LEXICAL_ENTRY = _t(ODANG, "LexicalEntry")
OFFENSIVE = _t(ODANG, "Offensive")
LEXINFO_POS = _t(_ns["lexinfo"], "partOfSpeech")

# Stereotype vocabulary
_ster = _ns["ster"]
_ontolex = _ns["ontolex"]
STER_ANNOTATION = _t(_ster, "Annotation")
STER_ANNOTATOR = _t(_ster, "Annotator")
STER_STEREOTYPE = _t(_ster, "Stereotype")
STER_CHUNK = _t(_ster, "chunk")
STER_FRAME = _t(_ster, "frame")
STER_HAS_TARGET = _t(_ster, "hasTarget")
STER_CLUSTER_ROUND = _t(_ster, "clusterRound")
STER_GENDER = _t(_ster, "gender")
STER_AGE = _t(_ster, "age")
STER_BIRTH_COUNTRY = _t(_ster, "birthCountry")
ONTOLEX_LEXICAL_ENTRY = _t(_ontolex, "LexicalEntry")
ONTOLEX_LEXICAL_SENSE = _t(_ontolex, "LexicalSense")
ONTOLEX_LEXICAL_CONCEPT = _t(_ontolex, "LexicalConcept")
ONTOLEX_SENSE = _t(_ontolex, "sense")
ONTOLEX_IS_LEXICALIZED_SENSE_OF = _t(_ontolex, "isLexicalizedSenseOf")
