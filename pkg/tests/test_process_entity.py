import pytest

from app.utils.process_entity import EntityRecognizer, pattern_tag, tag_ne


@pytest.fixture(scope="module")
def recognizer():
    return EntityRecognizer()


class TestPatterns:
    @pytest.mark.parametrize(
        "token,tag",
        [
            ("0.6607", "NUMBER"),
            ("45%", "NUMBER"),
            ("1,234", "NUMBER"),
            ("-3.5", "NUMBER"),
            ("12", "NUMBER"),
            ("2010", "TIME"),
            ("12:30", "TIME"),
            ("March", "TIME"),
            ("Sept.", "TIME"),
            ("method", None),
            ("1.2.3", None),
        ],
    )
    def test_shapes(self, token, tag):
        assert pattern_tag(token) == tag


class TestGazetteers:
    def test_person_location_time(self, recognizer):
        tokens = ["John", "visited", "New", "York", "in", "2010"]
        assert tag_ne(tokens, recognizer) == ["PERSON", "NONE", "LOCATION", "LOCATION", "NONE", "TIME"]

    def test_multi_word_organization(self, recognizer):
        assert recognizer.tag(["at", "Stanford", "University"]) == ["NONE", "ORGANIZATION", "ORGANIZATION"]

    def test_organization_suffix(self, recognizer):
        assert recognizer.tag(["Acme", "Corp."]) == ["ORGANIZATION", "ORGANIZATION"]

    def test_lowercase_names_are_not_entities(self, recognizer):
        assert recognizer.tag(["new", "york"]) == ["NONE", "NONE"]

    def test_punctuation_around_names(self, recognizer):
        assert recognizer.tag(["(Boston),", "0.5;"]) == ["LOCATION", "NUMBER"]

    def test_empty(self, recognizer):
        assert recognizer.tag([]) == []

    def test_custom_gazetteer_dir(self, tmp_path):
        (tmp_path / "person.txt").write_text("Zork\n")
        (tmp_path / "location.txt").write_text("")
        (tmp_path / "organization.txt").write_text("")
        assert EntityRecognizer(str(tmp_path)).tag(["Zork", "John"]) == ["PERSON", "NONE"]
