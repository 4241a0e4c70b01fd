# Utilitaires : séries symétriques et sérialisation
