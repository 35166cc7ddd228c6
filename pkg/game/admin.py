from django.contrib import admin
from .models import RunRecord


@admin.register(RunRecord)
class RunRecordAdmin(admin.ModelAdmin):
    """Runs are written by the solve command only; the admin just browses them."""
    list_display = ('scenario_id', 'eps', 'status', 'value_eps', 'upper_t0', 'lower_unreg', 'iterations', 'created')
    list_filter = ('status', 'scenario_id')
    search_fields = ('scenario_id',)
    readonly_fields = [field.name for field in RunRecord._meta.fields]

    def has_add_permission(self, request):
        return False

    def has_change_permission(self, request, obj=None):
        return False
